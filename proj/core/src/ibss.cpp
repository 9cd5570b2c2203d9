#include "musel/ibss.hpp"

#include <cmath>
#include <string>

namespace musel {

namespace {

constexpr double kSigmaFloor = 1e-12;

std::vector<Vec> column_sqnorms(const MultiTaskDataset& data) {
  std::vector<Vec> out;
  out.reserve(data.X.size());
  for (const auto& Xk : data.X) out.push_back(Xk.colwise().squaredNorm());
  return out;
}

UnivariateStats stats_from(const MultiTaskDataset& data, const std::vector<Vec>& colsq,
                           const std::vector<Vec>& responses, double sigma_sq) {
  const int K = data.K();
  const Index p = data.p();
  UnivariateStats st;
  st.beta_hat.resize(K, p);
  st.s_sq.resize(K, p);
  st.z.resize(K, p);
  for (int k = 0; k < K; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const Vec xty = data.X[ku].transpose() * responses[ku];
    st.beta_hat.row(k) = (xty.array() / colsq[ku].array()).transpose();
    st.s_sq.row(k) = (sigma_sq / colsq[ku].array()).transpose();
    st.z.row(k) = st.beta_hat.row(k).array() / st.s_sq.row(k).array().sqrt();
  }
  return st;
}

// E_q sum_k ||y_k - sum_l mu_l||^2 through first/second moments:
// point residual plus per-effect variance surplus
// Q_lk - ||X beta_l||^2, with Q_lk = sum_j rhat (mu1^2 + sigma1^2) ||x_j||^2.
double expected_rss(const MultiTaskDataset& data, const IbssState& state,
                    const std::vector<Vec>& colsq) {
  double erss = 0.0;
  for (int k = 0; k < data.K(); ++k) {
    const auto ku = static_cast<std::size_t>(k);
    erss += (data.y[ku] - state.fitted_total[ku]).squaredNorm();
    for (const auto& eff : state.effects) {
      if (eff.null_state) continue;
      const auto& post = eff.posterior;
      const double q = (eff.rhat.row(k).array() *
                        (post.mu1.row(k).array().square() + post.sigma1_sq.row(k).array()) *
                        colsq[ku].transpose().array())
                           .sum();
      erss += q - eff.fitted[ku].squaredNorm();
    }
  }
  return erss;
}

}  // namespace

double compute_elbo(const MultiTaskDataset& data, const IbssState& state, double sigma_sq) {
  const auto colsq = column_sqnorms(data);
  const double N = static_cast<double>(data.total_n());
  double elbo = -0.5 * N * std::log(2.0 * M_PI * sigma_sq) -
                expected_rss(data, state, colsq) / (2.0 * sigma_sq);
  for (const auto& eff : state.effects) elbo -= eff.kl;
  return elbo;
}

double estimate_sigma_sq(const MultiTaskDataset& data, const IbssState& state) {
  const auto colsq = column_sqnorms(data);
  return expected_rss(data, state, colsq) / static_cast<double>(data.total_n());
}

IbssEngine::IbssEngine(const MultiTaskDataset& data, const PriorWeights& pw, int L,
                       const IbssOptions& opts)
    : data_(data), pw_(pw), opts_(opts), L_(L) {
  check(L >= 1, "fit_ibss: L must be >= 1");
  data_.validate();
  check(pw.K() == data.K(), "fit_ibss: prior K does not match data K");
  col_sqnorm_ = column_sqnorms(data_);
  for (int k = 0; k < data_.K(); ++k) {
    for (Index j = 0; j < data_.p(); ++j)
      check(col_sqnorm_[static_cast<std::size_t>(k)](j) > 0.0,
            "fit_ibss: zero-norm column in data set " + std::to_string(k + 1));
  }

  const double vy = pooled_response_variance(data_.y);
  sigma_sq_ = opts_.fixed_sigma_sq.value_or(std::max(vy, kSigmaFloor));
  check(sigma_sq_ > 0.0, "fit_ibss: sigma_sq must be positive");

  state_.effects.resize(static_cast<std::size_t>(L));
  for (auto& eff : state_.effects) {
    eff.rhat = Mat::Zero(data_.K(), data_.p());
    eff.beta_hat.assign(static_cast<std::size_t>(data_.K()), Vec::Zero(data_.p()));
    eff.sigma0_sq = opts_.fixed_sigma0_sq.value_or(0.2 * vy);
    for (int k = 0; k < data_.K(); ++k)
      eff.fitted.push_back(Vec::Zero(data_.n(k)));
  }
  for (int k = 0; k < data_.K(); ++k) state_.fitted_total.push_back(Vec::Zero(data_.n(k)));
}

std::vector<Vec> IbssEngine::residual(int l) const {
  const auto& eff = state_.effects[static_cast<std::size_t>(l)];
  std::vector<Vec> r;
  r.reserve(data_.y.size());
  for (int k = 0; k < data_.K(); ++k) {
    const auto ku = static_cast<std::size_t>(k);
    r.push_back(data_.y[ku] - state_.fitted_total[ku] + eff.fitted[ku]);
  }
  return r;
}

void IbssEngine::update_effect(int l) {
  auto& eff = state_.effects[static_cast<std::size_t>(l)];
  const std::vector<Vec> resid = residual(l);
  const UnivariateStats stats = stats_from(data_, col_sqnorm_, resid, sigma_sq_);

  if (opts_.fixed_sigma0_sq) {
    eff.sigma0_sq = *opts_.fixed_sigma0_sq;
  } else {
    const double v = pooled_response_variance(resid);
    if (v <= 0.0) {
      eff.sigma0_sq = 0.0;
    } else {
      eff.sigma0_sq =
          estimate_sigma0_sq(stats, pw_, sigma_sq_, {1e-8 * v, 100.0 * v}, eff.sigma0_sq);
    }
  }

  eff.posterior = muser_posterior(stats, eff.sigma0_sq, pw_);
  eff.rhat = eff.posterior.rhat();

  // KL(q_l || g_l) via the exact-posterior identity
  //   E_q log q/g = E_q log P(resid | mu) - log P(resid),
  // which reduces to -(Q - 2 resid.f)/(2 sigma^2) - log_evidence_ratio.
  double kl = -eff.posterior.log_evidence_ratio;
  for (int k = 0; k < data_.K(); ++k) {
    const auto ku = static_cast<std::size_t>(k);
    eff.beta_hat[ku] =
        (eff.rhat.row(k).transpose().array() * eff.posterior.mu1.row(k).transpose().array())
            .matrix();
    Vec fitted_new = data_.X[ku] * eff.beta_hat[ku];
    const double q = (eff.rhat.row(k).array() *
                      (eff.posterior.mu1.row(k).array().square() +
                       eff.posterior.sigma1_sq.row(k).array()) *
                      col_sqnorm_[ku].transpose().array())
                         .sum();
    kl -= (q - 2.0 * resid[ku].dot(fitted_new)) / (2.0 * sigma_sq_);
    state_.fitted_total[ku] += fitted_new - eff.fitted[ku];
    eff.fitted[ku] = std::move(fitted_new);
  }
  eff.kl = kl;
  eff.null_state = false;
}

void IbssEngine::update_sigma_sq() {
  if (opts_.fixed_sigma_sq) return;
  sigma_sq_ = std::max(expected_rss(data_, state_, col_sqnorm_) / static_cast<double>(data_.total_n()),
                       kSigmaFloor);
}

double IbssEngine::elbo() const {
  const double N = static_cast<double>(data_.total_n());
  double e = -0.5 * N * std::log(2.0 * M_PI * sigma_sq_) -
             expected_rss(data_, state_, col_sqnorm_) / (2.0 * sigma_sq_);
  for (const auto& eff : state_.effects) e -= eff.kl;
  return e;
}

bool IbssEngine::sweep() {
  for (int l = 0; l < L_; ++l) update_effect(l);
  update_sigma_sq();
  const double e = elbo();
  if (!elbo_trace_.empty() && std::abs(e - elbo_trace_.back()) < opts_.tol) converged_ = true;
  elbo_trace_.push_back(e);
  ++sweeps_;
  return converged_;
}

MuSusieFit IbssEngine::fit() {
  while (!converged_ && sweeps_ < opts_.max_sweeps) sweep();

  MuSusieFit fit;
  fit.L = L_;
  fit.converged = converged_;
  fit.sweeps = sweeps_;
  fit.sigma_sq_hat = sigma_sq_;
  fit.elbo_trace = elbo_trace_;
  fit.effects.reserve(state_.effects.size());
  for (const auto& eff : state_.effects) {
    fit.effects.push_back(eff.posterior);
    fit.sigma0l_sq.push_back(eff.sigma0_sq);
  }
  for (int k = 0; k < data_.K(); ++k) {
    Vec b = Vec::Zero(data_.p());
    for (const auto& eff : state_.effects) b += eff.beta_hat[static_cast<std::size_t>(k)];
    fit.beta_hat.push_back(std::move(b));
  }
  fit.pip = pip_per_dataset(fit);
  return fit;
}

MuSusieFit fit_ibss(const MultiTaskDataset& data, int L, const PriorWeights& pw,
                    const IbssOptions& opts) {
  IbssEngine engine(data, pw, L, opts);
  return engine.fit();
}

Mat pip_per_dataset(const MuSusieFit& fit) {
  check(!fit.effects.empty(), "pip_per_dataset: fit has no effects");
  const int K = fit.effects[0].K();
  const Index p = fit.effects[0].p();
  Mat one_minus = Mat::Ones(K, p);
  for (const auto& post : fit.effects)
    one_minus = one_minus.cwiseProduct((1.0 - post.rhat().array()).matrix());
  return (1.0 - one_minus.array()).matrix();
}

std::vector<std::vector<int>> select_at_threshold(const Mat& pips, double threshold) {
  check(threshold > 0.0 && threshold <= 1.0, "select_at_threshold: threshold must be in (0, 1]");
  std::vector<std::vector<int>> out(static_cast<std::size_t>(pips.rows()));
  for (int k = 0; k < pips.rows(); ++k) {
    for (Index j = 0; j < pips.cols(); ++j) {
      if (pips(k, j) >= threshold) out[static_cast<std::size_t>(k)].push_back(static_cast<int>(j));
    }
  }
  return out;
}

}  // namespace musel
