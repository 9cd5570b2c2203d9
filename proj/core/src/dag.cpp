#include "musel/dag.hpp"

#include <algorithm>
#include <cmath>

#include "musel/parallel.hpp"

namespace musel {

Order identity_order(Index p) {
  Order o;
  o.perm.resize(static_cast<std::size_t>(p));
  for (Index i = 0; i < p; ++i) o.perm[static_cast<std::size_t>(i)] = static_cast<int>(i);
  return o;
}

Order random_order(Index p, Rng& rng) {
  Order o = identity_order(p);
  for (Index i = p - 1; i > 0; --i) {
    const auto j = rng.uniform_int(static_cast<std::uint64_t>(i + 1));
    std::swap(o.perm[static_cast<std::size_t>(i)], o.perm[static_cast<std::size_t>(j)]);
  }
  return o;
}

bool is_valid_order(const Order& order) {
  std::vector<bool> seen(order.perm.size(), false);
  for (int v : order.perm) {
    if (v < 0 || v >= static_cast<int>(order.perm.size()) || seen[static_cast<std::size_t>(v)])
      return false;
    seen[static_cast<std::size_t>(v)] = true;
  }
  return true;
}

Order propose_adjacent_transposition(const Order& order, Rng& rng) {
  check(order.p() >= 2, "propose_adjacent_transposition: p must be >= 2");
  const auto j = static_cast<std::size_t>(rng.uniform_int(static_cast<std::uint64_t>(order.p() - 1)));
  Order next = order;
  std::swap(next.perm[j], next.perm[j + 1]);
  return next;
}

std::size_t DagModel::CacheKeyHash::operator()(const CacheKey& k) const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto mix = [&h](std::uint64_t v) {
    h ^= v;
    h *= 0x100000001b3ULL;
  };
  mix(static_cast<std::uint64_t>(k.node));
  for (std::uint64_t w : k.parent_bits) mix(w);
  return static_cast<std::size_t>(h);
}

DagModel::DagModel(const MultiTaskDataset& data, const PriorWeights& pw, DagOptions opts)
    : data_(data), pw_(pw), opts_(opts) {
  data_.validate(/*require_responses=*/false);
  check(pw_.K() == data_.K(), "DagModel: prior K does not match data K");
  if (opts_.L_per_node <= 0)
    opts_.L_per_node = static_cast<int>(std::min<Index>(10, data_.p() - 1));
  for (int k = 0; k < data_.K(); ++k) {
    const auto& Xk = data_.X[static_cast<std::size_t>(k)];
    col_var_.push_back(Xk.colwise().squaredNorm() / static_cast<double>(Xk.rows()));
  }
}

std::shared_ptr<const NodeFit> DagModel::fit_node(int node, const std::vector<int>& parents) const {
  const int K = data_.K();
  const Index p = data_.p();
  auto fit = std::make_shared<NodeFit>();
  fit->edge_prob = Mat::Zero(K, p);
  fit->beta_hat.assign(static_cast<std::size_t>(K), Vec::Zero(p));

  if (parents.empty()) {
    // Rootless node: marginal Gaussian with the pooled column mean square.
    double ss = 0.0, n = 0.0;
    for (int k = 0; k < K; ++k) {
      ss += data_.X[static_cast<std::size_t>(k)].col(node).squaredNorm();
      n += static_cast<double>(data_.n(k));
    }
    fit->sigma_sq = std::max(ss / n, 1e-12);
    const double sd = std::sqrt(fit->sigma_sq);
    for (int k = 0; k < K; ++k) {
      const double nk = static_cast<double>(data_.n(k));
      const double rss = data_.X[static_cast<std::size_t>(k)].col(node).squaredNorm();
      fit->log_lik += -0.5 * nk * std::log(2.0 * M_PI) - nk * std::log(sd) -
                      rss / (2.0 * fit->sigma_sq);
    }
    return fit;
  }

  std::vector<Vec> responses;
  responses.reserve(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k)
    responses.push_back(data_.X[static_cast<std::size_t>(k)].col(node));
  const MultiTaskDataset sub = subset_columns(data_, parents, responses);

  MuSusieFit ibss = fit_ibss(sub, opts_.L_per_node, pw_, opts_.ibss);
  fit->sigma_sq = ibss.sigma_sq_hat;
  fit->converged = ibss.converged;
  const double sd = std::sqrt(fit->sigma_sq);

  for (int k = 0; k < K; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const Vec resid = responses[ku] - sub.X[ku] * ibss.beta_hat[ku];
    const double nk = static_cast<double>(data_.n(k));
    fit->log_lik +=
        -0.5 * nk * std::log(2.0 * M_PI) - nk * std::log(sd) - resid.squaredNorm() / (2.0 * fit->sigma_sq);
    for (std::size_t c = 0; c < parents.size(); ++c) {
      fit->edge_prob(k, parents[c]) = ibss.pip(k, static_cast<Index>(c));
      fit->beta_hat[ku](parents[c]) = ibss.beta_hat[ku](static_cast<Index>(c));
    }
  }

  // Penalty: expected number of activations with |I| = m, aggregated by
  // summing the L per-effect alpha vectors, each at cost -omega_m log p.
  const double logp = std::log(static_cast<double>(p));
  std::vector<double> expected_m(static_cast<std::size_t>(K) + 1, 0.0);
  for (const auto& post : ibss.effects) {
    for (std::uint32_t mask = 1, nm = subset_count(K); mask <= nm; ++mask) {
      expected_m[static_cast<std::size_t>(__builtin_popcount(mask))] +=
          post.alpha.row(mask - 1).sum();
    }
  }
  for (int m = 1; m <= K; ++m)
    fit->log_pen -= pw_.omegas[static_cast<std::size_t>(m - 1)] * logp *
                    expected_m[static_cast<std::size_t>(m)];
  return fit;
}

std::shared_ptr<const NodeFit> DagModel::node_fit(int node, const std::vector<int>& parents) const {
  CacheKey key;
  key.node = node;
  key.parent_bits.assign(static_cast<std::size_t>((data_.p() + 63) / 64), 0);
  for (int i : parents) {
    check(i != node && i >= 0 && i < static_cast<int>(data_.p()), "node_fit: bad parent index");
    key.parent_bits[static_cast<std::size_t>(i) / 64] |= (1ULL << (static_cast<std::size_t>(i) % 64));
  }
  {
    std::lock_guard<std::mutex> lk(cache_mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  std::vector<int> sorted = parents;
  std::sort(sorted.begin(), sorted.end());
  auto fit = fit_node(node, sorted);
  {
    std::lock_guard<std::mutex> lk(cache_mu_);
    if (cache_.size() >= opts_.cache_limit && !cache_fifo_.empty()) {
      cache_.erase(cache_fifo_.front());
      cache_fifo_.erase(cache_fifo_.begin());
    }
    auto [it, inserted] = cache_.emplace(key, fit);
    if (inserted) cache_fifo_.push_back(key);
    return it->second;
  }
}

namespace {

void refresh_totals(OrderState& s) {
  s.log_likelihood = 0.0;
  s.log_penalty = 0.0;
  for (const auto& f : s.fits) {
    s.log_likelihood += f->log_lik;
    s.log_penalty += f->log_pen;
  }
}

}  // namespace

OrderState DagModel::fit_order(const Order& order) const {
  check(is_valid_order(order) && order.p() == data_.p(), "fit_order: invalid order");
  OrderState s;
  s.order = order;
  s.fits.resize(static_cast<std::size_t>(data_.p()));
  parallel_for(
      0, static_cast<long>(data_.p()),
      [&](long t) {
        const int node = order.perm[static_cast<std::size_t>(t)];
        std::vector<int> parents(order.perm.begin(), order.perm.begin() + t);
        s.fits[static_cast<std::size_t>(node)] = node_fit(node, parents);
      },
      opts_.threads);
  refresh_totals(s);
  return s;
}

OrderScore DagModel::score(const OrderState& state) const {
  OrderScore sc;
  sc.log_likelihood = state.log_likelihood;
  sc.log_penalty = state.log_penalty;
  sc.R.assign(static_cast<std::size_t>(data_.K()), Mat::Zero(data_.p(), data_.p()));
  sc.node_sigma_sq.resize(static_cast<std::size_t>(data_.p()));
  for (Index j = 0; j < data_.p(); ++j) {
    const auto& f = state.fits[static_cast<std::size_t>(j)];
    sc.node_sigma_sq[static_cast<std::size_t>(j)] = f->sigma_sq;
    for (int k = 0; k < data_.K(); ++k)
      sc.R[static_cast<std::size_t>(k)].col(j) = f->edge_prob.row(k).transpose();
  }
  return sc;
}

OrderState DagModel::mh_step(const OrderState& current, Rng& rng, bool* accepted) const {
  const Index p = data_.p();
  check(p >= 2, "mh_step: p must be >= 2");
  const auto pos = static_cast<std::size_t>(rng.uniform_int(static_cast<std::uint64_t>(p - 1)));
  const int a = current.order.perm[pos];      // moves later
  const int b = current.order.perm[pos + 1];  // moves earlier

  std::vector<int> prefix(current.order.perm.begin(),
                          current.order.perm.begin() + static_cast<long>(pos));
  auto fit_b = node_fit(b, prefix);
  prefix.push_back(b);
  auto fit_a = node_fit(a, prefix);

  const auto au = static_cast<std::size_t>(a), bu = static_cast<std::size_t>(b);
  const double delta = (fit_a->log_lik + fit_a->log_pen + fit_b->log_lik + fit_b->log_pen) -
                       (current.fits[au]->log_lik + current.fits[au]->log_pen +
                        current.fits[bu]->log_lik + current.fits[bu]->log_pen);

  const double u = rng.uniform01();
  const bool accept = delta >= 0.0 || (u > 0.0 && std::log(u) < delta);
  if (accepted) *accepted = accept;
  if (!accept) return current;

  OrderState next = current;
  std::swap(next.order.perm[pos], next.order.perm[pos + 1]);
  next.fits[au] = std::move(fit_a);
  next.fits[bu] = std::move(fit_b);
  refresh_totals(next);
  return next;
}

DagPosterior DagModel::run_chain(const ChainOptions& copts, const Order& init, Rng& rng) const {
  check(copts.iters > copts.burn_in && copts.burn_in >= 0, "run_chain: need iters > burn_in >= 0");
  check(copts.thin >= 1, "run_chain: thin must be >= 1");

  DagPosterior out;
  out.burn_in = copts.burn_in;
  out.thin = copts.thin;
  out.R_hat.assign(static_cast<std::size_t>(data_.K()), Mat::Zero(data_.p(), data_.p()));

  OrderState state = fit_order(init);
  double lp = log_gibbs_posterior(state);
  out.best_order = state.order;
  out.best_log_post = lp;

  long accepted_total = 0;
  long retained = 0;
  out.log_post_trace.reserve(static_cast<std::size_t>(copts.iters));
  for (long t = 1; t <= copts.iters; ++t) {
    bool accepted = false;
    state = mh_step(state, rng, &accepted);
    if (accepted) {
      ++accepted_total;
      lp = log_gibbs_posterior(state);
      if (lp > out.best_log_post) {
        out.best_log_post = lp;
        out.best_order = state.order;
      }
    }
    out.log_post_trace.push_back(lp);
    if (t > copts.burn_in && (t - copts.burn_in) % copts.thin == 0) {
      ++retained;
      out.samples.emplace_back(state.order, lp);
      for (Index j = 0; j < data_.p(); ++j) {
        const auto& f = state.fits[static_cast<std::size_t>(j)];
        for (int k = 0; k < data_.K(); ++k)
          out.R_hat[static_cast<std::size_t>(k)].col(j) += f->edge_prob.row(k).transpose();
      }
    }
  }
  for (auto& R : out.R_hat) R /= static_cast<double>(retained);
  out.acceptance_rate = static_cast<double>(accepted_total) / static_cast<double>(copts.iters);
  return out;
}

}  // namespace musel
