#pragma once

#include <optional>
#include <vector>

#include "musel/muser.hpp"

namespace musel {

struct IbssOptions {
  double tol = 1e-4;    // stop when |delta ELBO| between sweeps < tol
  int max_sweeps = 200;
  // Fixed variance components (disables the corresponding estimation step).
  std::optional<double> fixed_sigma_sq;
  std::optional<double> fixed_sigma0_sq;
};

// Variational state of one single-effect model.
struct EffectState {
  MuSerPosterior posterior;
  Mat rhat;                   // K x p: sum_{I : k in I} alpha[I,j]
  std::vector<Vec> beta_hat;  // K vectors of length p: rhat .* mu1
  std::vector<Vec> fitted;    // K vectors of length n_k: X beta_hat
  double sigma0_sq = 0.0;
  double kl = 0.0;  // KL(q_l || prior_l), fixed between updates of this effect
  bool null_state = true;
};

struct IbssState {
  std::vector<EffectState> effects;
  std::vector<Vec> fitted_total;  // sum over effects of X beta_hat_l, per k
};

// ELBO of the factorized variational family at the given state:
//   -(sum_k n_k / 2) log(2 pi sigma^2) - ERSS / (2 sigma^2) - sum_l KL_l,
// where ERSS = E_q sum_k ||y_k - sum_l mu_l||^2 expands through first and
// second posterior moments of each effect (effects independent under q).
double compute_elbo(const MultiTaskDataset& data, const IbssState& state, double sigma_sq);

// ELBO-maximizing residual variance: ERSS / sum_k n_k.
double estimate_sigma_sq(const MultiTaskDataset& data, const IbssState& state);

struct MuSusieFit {
  int L = 0;
  bool converged = false;
  int sweeps = 0;
  std::vector<MuSerPosterior> effects;
  std::vector<double> sigma0l_sq;
  double sigma_sq_hat = 0.0;
  std::vector<Vec> beta_hat;  // K vectors of length p (posterior means)
  Mat pip;                    // K x p
  std::vector<double> elbo_trace;  // one entry per sweep
};

// Coordinate-ascent driver. Exposed so tests can step effect-by-effect;
// fit_ibss below is the plain loop.
class IbssEngine {
 public:
  IbssEngine(const MultiTaskDataset& data, const PriorWeights& pw, int L,
             const IbssOptions& opts = {});

  // One coordinate update of effect l: re-estimate sigma0_l on the current
  // residuals, refit the single-effect posterior, refresh moments.
  void update_effect(int l);
  void update_sigma_sq();

  // Full sweep: effects 0..L-1 in order, then the sigma^2 update, then one
  // ELBO evaluation appended to the trace. Returns true once converged.
  bool sweep();

  double elbo() const;
  double sigma_sq() const { return sigma_sq_; }
  const IbssState& state() const { return state_; }
  const std::vector<double>& elbo_trace() const { return elbo_trace_; }

  MuSusieFit fit();  // sweeps until convergence or max_sweeps

 private:
  std::vector<Vec> residual(int l) const;

  const MultiTaskDataset& data_;
  const PriorWeights& pw_;
  IbssOptions opts_;
  int L_;
  std::vector<Vec> col_sqnorm_;  // K vectors of length p
  IbssState state_;
  double sigma_sq_ = 1.0;
  std::vector<double> elbo_trace_;
  bool converged_ = false;
  int sweeps_ = 0;
};

// Algorithm: initialize all effects at zero; per sweep and per effect l, form
// the residual excluding effect l, re-estimate sigma0_l, refit the
// single-effect posterior on the residual, update the effect's posterior-mean
// coefficients; re-estimate sigma^2 after the effect loop; stop when the ELBO
// change falls below opts.tol. Non-convergence within max_sweeps returns a
// fit with converged = false.
MuSusieFit fit_ibss(const MultiTaskDataset& data, int L, const PriorWeights& pw,
                    const IbssOptions& opts = {});

// pip[k,j] = 1 - prod_l (1 - rhat_l[k,j])
Mat pip_per_dataset(const MuSusieFit& fit);

// Selected covariates per dataset: { j : pip[k,j] >= threshold } (0-based).
std::vector<std::vector<int>> select_at_threshold(const Mat& pips, double threshold = 0.5);

}  // namespace musel
