#include "musel/muser.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace musel {

namespace {

void check_columns(const MultiTaskDataset& data) {
  for (int k = 0; k < data.K(); ++k) {
    const auto sq = data.X[static_cast<std::size_t>(k)].colwise().squaredNorm();
    for (Index j = 0; j < data.p(); ++j) {
      check(sq(j) > 0.0, "univariate_stats: column " + std::to_string(j + 1) + " of data set " +
                             std::to_string(k + 1) + " has zero norm");
    }
  }
}

}  // namespace

UnivariateStats univariate_stats(const MultiTaskDataset& data, const std::vector<Vec>& responses,
                                 double sigma_sq) {
  check(sigma_sq > 0.0, "univariate_stats: sigma_sq must be positive");
  check_columns(data);
  const int K = data.K();
  const Index p = data.p();
  UnivariateStats st;
  st.beta_hat.resize(K, p);
  st.s_sq.resize(K, p);
  st.z.resize(K, p);
  for (int k = 0; k < K; ++k) {
    const auto& Xk = data.X[static_cast<std::size_t>(k)];
    const Vec colsq = Xk.colwise().squaredNorm();
    const Vec xty = Xk.transpose() * responses[static_cast<std::size_t>(k)];
    st.beta_hat.row(k) = (xty.array() / colsq.array()).transpose();
    st.s_sq.row(k) = (sigma_sq / colsq.array()).transpose();
    st.z.row(k) = st.beta_hat.row(k).array() / st.s_sq.row(k).array().sqrt();
  }
  return st;
}

UnivariateStats univariate_stats(const MultiTaskDataset& data, double sigma_sq) {
  check(data.has_responses(), "univariate_stats: dataset has no responses");
  return univariate_stats(data, data.y, sigma_sq);
}

namespace {

// lbf[k,j] = 0.5 * (-log1p(s0^2/s^2) + z^2 s0^2/(s0^2 + s^2))
Mat per_dataset_lbf(const UnivariateStats& stats, double sigma0_sq) {
  const auto& s2 = stats.s_sq.array();
  const auto& z2 = stats.z.array().square();
  return (0.5 * (-(sigma0_sq / s2).log1p() + z2 * sigma0_sq / (sigma0_sq + s2))).matrix();
}

}  // namespace

double log_bf(const UnivariateStats& stats, Index j, SubsetIndex I, double sigma0_sq) {
  check(sigma0_sq >= 0.0, "log_bf: sigma0_sq must be nonnegative");
  if (sigma0_sq == 0.0) return 0.0;
  double lbf = 0.0;
  for (int k = 0; k < stats.s_sq.rows(); ++k) {
    if (!I.contains(k + 1)) continue;
    const double s2 = stats.s_sq(k, j);
    const double z2 = stats.z(k, j) * stats.z(k, j);
    lbf += 0.5 * (-std::log1p(sigma0_sq / s2) + z2 * sigma0_sq / (sigma0_sq + s2));
  }
  return lbf;
}

Mat MuSerPosterior::rhat() const {
  const int Kn = K();
  Mat out = Mat::Zero(Kn, p());
  for (std::uint32_t mask = 1, nm = subset_count(Kn); mask <= nm; ++mask) {
    for (int k = 0; k < Kn; ++k) {
      if ((mask >> k) & 1u) out.row(k) += alpha.row(mask - 1);
    }
  }
  return out;
}

MuSerPosterior muser_posterior(const UnivariateStats& stats, double sigma0_sq,
                               const PriorWeights& pw) {
  check(sigma0_sq >= 0.0, "muser_posterior: sigma0_sq must be nonnegative");
  const int K = static_cast<int>(stats.s_sq.rows());
  const Index p = stats.s_sq.cols();
  check(pw.K() == K, "muser_posterior: prior K does not match data K");
  const std::uint32_t nmask = subset_count(K);

  MuSerPosterior post;
  post.alpha.resize(nmask, p);

  const Mat lbf = per_dataset_lbf(stats, sigma0_sq);
  const double log_pi_phi = std::log(pw.pi_phi);

  // log alpha[I,j] (unnormalized) for mask I, via lbf(I) = lbf(I \ lowbit) + lbf(lowbit)
  for (std::uint32_t mask = 1; mask <= nmask; ++mask) {
    const std::uint32_t low = mask & (mask - 1u);  // mask without lowest set bit
    const int kbit = __builtin_ctz(mask);
    const int card = __builtin_popcount(mask);
    const double lw = log_pi_phi + pw.log_pi(card);
    if (low == 0) {
      post.alpha.row(mask - 1) = lbf.row(kbit).array() + lw;
    } else {
      const int card_low = __builtin_popcount(low);
      const double lw_low = log_pi_phi + pw.log_pi(card_low);
      post.alpha.row(mask - 1) = post.alpha.row(low - 1).array() - lw_low + lbf.row(kbit).array() + lw;
    }
  }

  const double log_alpha0 = std::log1p(-pw.pi_phi);
  double m = log_alpha0;
  for (std::uint32_t mask = 1; mask <= nmask; ++mask)
    m = std::max(m, post.alpha.row(mask - 1).maxCoeff());
  double tot = std::exp(log_alpha0 - m);
  for (std::uint32_t mask = 1; mask <= nmask; ++mask) {
    post.alpha.row(mask - 1) = (post.alpha.row(mask - 1).array() - m).exp();
    tot += post.alpha.row(mask - 1).sum();
  }
  post.alpha /= tot;
  post.alpha0 = std::exp(log_alpha0 - m) / tot;
  post.log_evidence_ratio = m + std::log(tot);

  // sigma1^2 = 1/(1/s^2 + 1/s0^2); mu1 = (sigma1^2/s^2) beta_hat
  if (sigma0_sq == 0.0) {
    post.sigma1_sq = Mat::Zero(K, p);
    post.mu1 = Mat::Zero(K, p);
  } else {
    post.sigma1_sq =
        (stats.s_sq.array().inverse() + 1.0 / sigma0_sq).inverse().matrix();
    post.mu1 = (post.sigma1_sq.array() / stats.s_sq.array() * stats.beta_hat.array()).matrix();
  }
  return post;
}

MuSerPosterior muser_posterior(const MultiTaskDataset& data, double sigma_sq, double sigma0_sq,
                               const PriorWeights& pw) {
  return muser_posterior(univariate_stats(data, sigma_sq), sigma0_sq, pw);
}

double log_sigma0_objective(const UnivariateStats& stats, const PriorWeights& pw,
                            double sigma0_sq) {
  const int K = static_cast<int>(stats.s_sq.rows());
  const Index p = stats.s_sq.cols();
  const Mat lbf = per_dataset_lbf(stats, std::max(sigma0_sq, 0.0));

  // Per covariate: sum over subsets I of pi_|I| BF(j,I) collapses to
  // sum_m pi_m e_m(BF_1..BF_K) with e_m the elementary symmetric polynomials,
  // accumulated in log domain.
  double total = neg_inf;
  std::vector<double> e(static_cast<std::size_t>(K) + 1);
  for (Index j = 0; j < p; ++j) {
    std::fill(e.begin(), e.end(), neg_inf);
    e[0] = 0.0;
    for (int k = 0; k < K; ++k) {
      const double b = lbf(k, j);
      for (int m = std::min(k + 1, K); m >= 1; --m)
        e[static_cast<std::size_t>(m)] =
            logaddexp(e[static_cast<std::size_t>(m)], e[static_cast<std::size_t>(m - 1)] + b);
    }
    double vj = neg_inf;
    for (int m = 1; m <= K; ++m)
      vj = logaddexp(vj, pw.log_pi(m) + e[static_cast<std::size_t>(m)]);
    total = logaddexp(total, vj);
  }
  return total;
}

double estimate_sigma0_sq(const UnivariateStats& stats, const PriorWeights& pw, double sigma_sq,
                          Sigma0Bounds bounds, double extra_candidate) {
  check(bounds.lo >= 0.0 && bounds.lo < bounds.hi, "estimate_sigma0_sq: need 0 <= lo < hi");
  (void)sigma_sq;  // already baked into stats.s_sq

  const auto objective = [&](double s0) { return log_sigma0_objective(stats, pw, s0); };

  // Grid scan on log scale seeds the search; lo may be 0, so the grid floor
  // is tied to hi.
  const double glo = std::max(bounds.lo, 1e-12 * bounds.hi);
  const double tlo = std::log(glo), thi = std::log(bounds.hi);
  constexpr int grid_n = 32;
  std::vector<double> cands;
  cands.reserve(grid_n + 4);
  cands.push_back(bounds.lo);
  for (int i = 0; i < grid_n; ++i)
    cands.push_back(std::exp(tlo + (thi - tlo) * static_cast<double>(i) / (grid_n - 1)));

  int best_i = 0;
  double best_f = objective(cands[0]);
  for (std::size_t i = 1; i < cands.size(); ++i) {
    const double f = objective(cands[i]);
    if (f > best_f) {  // strict: ties keep the smaller sigma0^2
      best_f = f;
      best_i = static_cast<int>(i);
    }
  }

  // Golden-section refinement on t = log(sigma0^2) around the best grid point.
  double a = (best_i >= 2) ? std::log(cands[static_cast<std::size_t>(best_i - 1)]) : tlo;
  double b = (best_i + 1 < static_cast<int>(cands.size()))
                 ? std::log(cands[static_cast<std::size_t>(best_i + 1)])
                 : thi;
  if (a < b) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = objective(std::exp(x1));
    double f2 = objective(std::exp(x2));
    while (b - a > 1e-6) {
      if (f1 >= f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - invphi * (b - a);
        f1 = objective(std::exp(x1));
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + invphi * (b - a);
        f2 = objective(std::exp(x2));
      }
    }
    const double refined = std::exp(0.5 * (a + b));
    const double fr = objective(refined);
    if (fr > best_f) {
      best_f = fr;
      best_i = -1;
      cands.push_back(refined);
    } else if (refined < cands[static_cast<std::size_t>(best_i)] && fr == best_f) {
      best_i = -1;
      cands.push_back(refined);
    }
  }
  double best = best_i >= 0 ? cands[static_cast<std::size_t>(best_i)] : cands.back();

  // A caller-supplied candidate (last sweep's estimate) competes so repeated
  // estimation never lowers the objective.
  if (extra_candidate >= bounds.lo && extra_candidate <= bounds.hi) {
    const double fe = objective(extra_candidate);
    if (fe > best_f || (fe == best_f && extra_candidate < best)) best = extra_candidate;
  }
  return best;
}

}  // namespace musel
