#pragma once

#include "musel/common.hpp"
#include "musel/dataset.hpp"
#include "musel/prior.hpp"

namespace musel {

// Per-covariate, per-dataset least-squares summaries:
//   beta_hat[k,j] = x_j' y / x_j' x_j
//   s_sq[k,j]     = sigma^2 / x_j' x_j
//   z[k,j]        = beta_hat / sqrt(s_sq)
struct UnivariateStats {
  Mat beta_hat;  // K x p
  Mat s_sq;      // K x p
  Mat z;         // K x p
};

UnivariateStats univariate_stats(const MultiTaskDataset& data, double sigma_sq);
// Same, with responses substituted (e.g. IBSS residuals).
UnivariateStats univariate_stats(const MultiTaskDataset& data, const std::vector<Vec>& responses,
                                 double sigma_sq);

// log BF for activating covariate j in the data sets of I:
//   sum_{k in I} [ 0.5 log(s^2/(s0^2+s^2)) + z^2 s0^2 / (2 (s0^2+s^2)) ].
double log_bf(const UnivariateStats& stats, Index j, SubsetIndex I, double sigma0_sq);

// Posterior for the multi-task single-effect regression model.
struct MuSerPosterior {
  Mat alpha;      // (2^K - 1) x p; row (mask - 1) holds subset `mask`
  double alpha0 = 0.0;
  Mat mu1;        // K x p posterior means given activation
  Mat sigma1_sq;  // K x p posterior variances given activation
  // log[(1 - pi_phi) + sum_{I,j} pi_phi pi_|I| BF(j, I)]: marginal evidence
  // of the single-effect model relative to the null model.
  double log_evidence_ratio = 0.0;

  int K() const { return static_cast<int>(mu1.rows()); }
  Index p() const { return mu1.cols(); }
  // alpha row index for subset mask
  double alpha_at(SubsetIndex I, Index j) const { return alpha(I.bits - 1, j); }
  // rhat[k,j] = sum_{I : k in I} alpha[I,j], the per-dataset activation probability
  Mat rhat() const;
};

// alpha[I,j] prop-to pi_phi pi_|I| BF(j,I); alpha0 prop-to 1 - pi_phi; all in
// log domain with log-sum-exp normalization. mu1 and sigma1_sq follow the
// harmonic-mean form sigma1^2 = 1/(1/s^2 + 1/s0^2), mu1 = (sigma1^2/s^2) beta_hat.
MuSerPosterior muser_posterior(const MultiTaskDataset& data, double sigma_sq, double sigma0_sq,
                               const PriorWeights& pw);
MuSerPosterior muser_posterior(const UnivariateStats& stats, double sigma0_sq,
                               const PriorWeights& pw);

struct Sigma0Bounds {
  double lo = 0.0;
  double hi = 1.0;
};

// Empirical-Bayes slab variance: argmax over [lo, hi] of
//   sum_{I,j} pi_|I| BF(j, I; sigma^2, s0^2),
// maximized in log domain. A 32-point log-spaced grid seeds a golden-section
// refinement; `extra_candidate` (e.g. last sweep's estimate) competes too.
// Ties break toward the smaller value; a flat objective returns lo.
double estimate_sigma0_sq(const UnivariateStats& stats, const PriorWeights& pw, double sigma_sq,
                          Sigma0Bounds bounds, double extra_candidate = -1.0);

// Objective of estimate_sigma0_sq in log domain (exposed for tests).
double log_sigma0_objective(const UnivariateStats& stats, const PriorWeights& pw,
                            double sigma0_sq);

}  // namespace musel
