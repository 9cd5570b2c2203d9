#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "musel/ibss.hpp"
#include "musel/rng.hpp"
#include "musel/simgen.hpp"
#include "oracles.hpp"

using namespace musel;

namespace {

MultiTaskDataset random_dataset(int K, Index n, Index p, Rng& rng, double beta_scale = 0.0,
                                Index active = 0) {
  MultiTaskDataset d;
  for (int k = 0; k < K; ++k) {
    Mat X(n, p);
    for (Index j = 0; j < p; ++j)
      for (Index i = 0; i < n; ++i) X(i, j) = rng.normal();
    Vec y(n);
    for (Index i = 0; i < n; ++i) y(i) = rng.normal();
    for (Index j = 0; j < active; ++j) y += beta_scale * X.col(j);
    d.X.push_back(std::move(X));
    d.y.push_back(std::move(y));
  }
  return d;
}

PriorWeights default_pw(int K, Index p, int L) {
  std::vector<double> omegas;
  for (int k = 0; k < K; ++k) omegas.push_back(1.0 + 0.25 * k);
  return derive_pi_from_omegas(omegas, p, L);
}

}  // namespace

TEST_CASE("null data: coefficients stay zero, PIPs sit at the prior level") {
  Rng rng(21);
  MultiTaskDataset d = random_dataset(2, 30, 6, rng);
  for (auto& yk : d.y) yk.setZero();
  const PriorWeights pw = default_pw(2, 6, 3);
  const MuSusieFit fit = fit_ibss(d, 3, pw);
  CHECK(fit.converged);
  CHECK(fit.sweeps <= 2);
  for (const auto& b : fit.beta_hat) CHECK(b.cwiseAbs().maxCoeff() == 0.0);

  // with no signal the slab collapses and alpha is the prior, so
  // pip = 1 - (1 - r_prior)^L with r_prior = sum_{I : k in I} alpha_prior
  const double z = (1.0 - pw.pi_phi) + pw.pi_phi * (2.0 * 6.0 * pw.pis[0] + 6.0 * pw.pis[1]);
  const double r_prior = pw.pi_phi * (pw.pis[0] + pw.pis[1]) / z;
  const double expect = 1.0 - std::pow(1.0 - r_prior, 3.0);
  for (int k = 0; k < 2; ++k)
    for (Index j = 0; j < 6; ++j) CHECK(fit.pip(k, j) == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("L=1 with fixed variances collapses to the single-effect posterior") {
  Rng rng(22);
  MultiTaskDataset d = random_dataset(2, 25, 5, rng);
  for (int k = 0; k < 2; ++k) d.y[static_cast<std::size_t>(k)] += 1.5 * d.X[static_cast<std::size_t>(k)].col(2);
  const PriorWeights pw = default_pw(2, 5, 1);

  IbssOptions opts;
  opts.fixed_sigma_sq = 1.0;
  opts.fixed_sigma0_sq = 0.8;
  const MuSusieFit fit = fit_ibss(d, 1, pw, opts);
  const MuSerPosterior direct = muser_posterior(d, 1.0, 0.8, pw);

  CHECK((fit.effects[0].alpha - direct.alpha).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(std::abs(fit.effects[0].alpha0 - direct.alpha0) < 1e-10);
  CHECK((fit.pip - direct.rhat()).cwiseAbs().maxCoeff() < 1e-10);
  // the top PIP sits on the planted covariate
  Index best = 0;
  fit.pip.row(0).maxCoeff(&best);
  CHECK(best == 2);
}

TEST_CASE("ELBO of the zero-effect state on any data is the null Gaussian log-likelihood") {
  Rng rng(23);
  const MultiTaskDataset d = random_dataset(2, 12, 4, rng);
  IbssState state;
  state.effects.resize(2);  // untouched effects contribute nothing
  for (int k = 0; k < 2; ++k) state.fitted_total.push_back(Vec::Zero(12));
  const double sigma_sq = 1.37;
  double expect = 0.0;
  for (int k = 0; k < 2; ++k)
    expect += -0.5 * 12.0 * std::log(2.0 * M_PI * sigma_sq) -
              d.y[static_cast<std::size_t>(k)].squaredNorm() / (2.0 * sigma_sq);
  CHECK(compute_elbo(d, state, sigma_sq) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("ELBO never decreases across coordinate updates") {
  Rng rng(24);
  for (int rep = 0; rep < 20; ++rep) {
    const int K = 1 + static_cast<int>(rng.uniform_int(3));
    const Index p = 3 + static_cast<Index>(rng.uniform_int(10));
    const Index n = 10 + static_cast<Index>(rng.uniform_int(20));
    const MultiTaskDataset d = random_dataset(K, n, p, rng, 0.8, std::min<Index>(p, 2));
    const PriorWeights pw = default_pw(K, p, 3);

    IbssEngine engine(d, pw, 3, {});
    double prev = engine.elbo();
    for (int sweep = 0; sweep < 5; ++sweep) {
      for (int l = 0; l < 3; ++l) {
        engine.update_effect(l);
        const double e = engine.elbo();
        CHECK(e >= prev - 1e-8);
        prev = e;
      }
      engine.update_sigma_sq();
      const double e = engine.elbo();
      CHECK(e >= prev - 1e-8);
      prev = e;
    }
  }
}

TEST_CASE("ELBO lower-bounds the exact evidence computed by enumeration") {
  Rng rng(25);
  for (int rep = 0; rep < 3; ++rep) {
    const MultiTaskDataset d = random_dataset(2, 6, 3, rng, 1.0, 1);
    const PriorWeights pw = default_pw(2, 3, 2);
    IbssOptions opts;
    opts.fixed_sigma_sq = 1.1;
    opts.fixed_sigma0_sq = 0.6;
    const MuSusieFit fit = fit_ibss(d, 2, pw, opts);
    const double evidence = oracle::enumerate_evidence(d, 2, 1.1, 0.6, pw);
    CHECK(fit.elbo_trace.back() <= evidence + 1e-9);
    // and the bound is reasonably tight here
    CHECK(fit.elbo_trace.back() > evidence - 5.0);
  }
}

TEST_CASE("estimate_sigma_sq at the null state is the pooled second moment") {
  Rng rng(26);
  const MultiTaskDataset d = random_dataset(3, 9, 4, rng);
  IbssState state;
  state.effects.resize(1);
  for (int k = 0; k < 3; ++k) state.fitted_total.push_back(Vec::Zero(9));
  double ss = 0.0;
  for (const auto& yk : d.y) ss += yk.squaredNorm();
  CHECK(estimate_sigma_sq(d, state) == doctest::Approx(ss / 27.0).epsilon(1e-12));
}

TEST_CASE("estimate_sigma_sq is zero for an exact point-mass fit of noiseless data") {
  MultiTaskDataset d;
  Mat X(6, 2);
  X << 1, 0.5, -1, 0.2, 2, -0.3, 0.7, 1.1, -0.4, 0.9, 1.3, -1.2;
  const double beta = 0.8;
  d.X.push_back(X);
  d.y.push_back(beta * X.col(0));

  IbssState state;
  EffectState eff;
  eff.null_state = false;
  eff.posterior.alpha = Mat::Zero(1, 2);
  eff.posterior.alpha(0, 0) = 1.0;  // point mass on covariate 0
  eff.posterior.alpha0 = 0.0;
  eff.posterior.mu1 = Mat::Zero(1, 2);
  eff.posterior.mu1(0, 0) = beta;
  eff.posterior.sigma1_sq = Mat::Zero(1, 2);
  eff.rhat = eff.posterior.rhat();
  eff.beta_hat.push_back(Vec::Zero(2));
  eff.beta_hat[0](0) = beta;
  eff.fitted.push_back(X * eff.beta_hat[0]);
  state.effects.push_back(eff);
  state.fitted_total.push_back(eff.fitted[0]);

  CHECK(estimate_sigma_sq(d, state) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("sigma^2 estimate zeroes the ELBO derivative (finite differences)") {
  Rng rng(27);
  const MultiTaskDataset d = random_dataset(2, 20, 5, rng, 0.9, 2);
  const PriorWeights pw = default_pw(2, 5, 3);
  IbssEngine engine(d, pw, 3, {});
  for (int l = 0; l < 3; ++l) engine.update_effect(l);
  const double s2 = estimate_sigma_sq(d, engine.state());
  const double h = 1e-5 * s2;
  const double up = compute_elbo(d, engine.state(), s2 + h);
  const double dn = compute_elbo(d, engine.state(), s2 - h);
  const double deriv = (up - dn) / (2.0 * h);
  const double scale = std::abs(compute_elbo(d, engine.state(), s2)) / s2;
  CHECK(std::abs(deriv) / scale < 1e-4);
}

TEST_CASE("pip_per_dataset composes per-effect probabilities") {
  MuSusieFit fit;
  fit.L = 2;
  MuSerPosterior e1, e2;
  e1.alpha = Mat::Zero(1, 2);
  e1.alpha(0, 0) = 0.5;
  e1.alpha0 = 0.5;
  e1.mu1 = Mat::Zero(1, 2);
  e1.sigma1_sq = Mat::Zero(1, 2);
  e2 = e1;
  fit.effects = {e1};
  CHECK(pip_per_dataset(fit)(0, 0) == doctest::Approx(0.5));  // single effect: pip = rhat
  fit.effects = {e1, e2};
  CHECK(pip_per_dataset(fit)(0, 0) == doctest::Approx(0.75));  // 1 - 0.25
}

TEST_CASE("pip matches a sampling oracle under independent effect draws") {
  Rng rng(28);
  const MultiTaskDataset d = random_dataset(2, 15, 4, rng, 0.8, 2);
  const PriorWeights pw = default_pw(2, 4, 3);
  const MuSusieFit fit = fit_ibss(d, 3, pw);

  // draw each effect's activation independently from its categorical
  constexpr int draws = 1000000;
  Mat counts = Mat::Zero(2, 4);
  Rng mc(991);
  for (int t = 0; t < draws; ++t) {
    Eigen::Matrix<bool, 2, 4> active;
    active.setConstant(false);
    for (const auto& post : fit.effects) {
      double u = mc.uniform01() - post.alpha0;
      if (u < 0) continue;
      for (std::uint32_t mask = 1; mask <= 3 && u >= 0; ++mask) {
        for (Index j = 0; j < 4 && u >= 0; ++j) {
          u -= post.alpha_at(SubsetIndex{mask}, j);
          if (u < 0) {
            for (int k = 0; k < 2; ++k)
              if ((mask >> k) & 1u) active(k, j) = true;
          }
        }
      }
    }
    for (int k = 0; k < 2; ++k)
      for (Index j = 0; j < 4; ++j)
        if (active(k, j)) counts(k, j) += 1.0;
  }
  counts /= static_cast<double>(draws);
  CHECK((counts - fit.pip).cwiseAbs().maxCoeff() < 1e-2);
}

TEST_CASE("select_at_threshold edge cases") {
  Mat pips(2, 3);
  pips << 0.0, 0.5, 0.9, 0.0, 0.49, 0.999;
  SUBCASE("all zeros give empty sets") {
    const auto sel = select_at_threshold(Mat::Zero(2, 3), 0.5);
    CHECK(sel[0].empty());
    CHECK(sel[1].empty());
  }
  SUBCASE("threshold boundary is inclusive") {
    const auto sel = select_at_threshold(pips, 0.5);
    CHECK(sel[0] == std::vector<int>{1, 2});
    CHECK(sel[1] == std::vector<int>{2});
  }
  SUBCASE("threshold 1.0 with PIPs below one selects nothing") {
    const auto sel = select_at_threshold(pips, 1.0);
    CHECK(sel[0].empty());
    CHECK(sel[1].empty());
  }
}

TEST_CASE("permuting covariates permutes PIPs identically") {
  Rng rng(29);
  const Index p = 8;
  const MultiTaskDataset d = random_dataset(2, 30, p, rng, 1.0, 2);
  const PriorWeights pw = default_pw(2, p, 4);
  const MuSusieFit base = fit_ibss(d, 4, pw);

  std::vector<int> perm(p);
  for (Index j = 0; j < p; ++j) perm[static_cast<std::size_t>(j)] = static_cast<int>(j);
  for (Index j = p - 1; j > 0; --j)
    std::swap(perm[static_cast<std::size_t>(j)],
              perm[static_cast<std::size_t>(rng.uniform_int(static_cast<std::uint64_t>(j + 1)))]);

  MultiTaskDataset permuted = d;
  for (auto& Xk : permuted.X) {
    Mat orig = Xk;
    for (Index j = 0; j < p; ++j) Xk.col(j) = orig.col(perm[static_cast<std::size_t>(j)]);
  }
  const MuSusieFit pf = fit_ibss(permuted, 4, pw);
  for (int k = 0; k < 2; ++k)
    for (Index j = 0; j < p; ++j)
      CHECK(pf.pip(k, j) ==
            doctest::Approx(base.pip(k, perm[static_cast<std::size_t>(j)])).epsilon(1e-8));
}

TEST_CASE("a converged fit is a fixed point of one more sweep") {
  Rng rng(30);
  const MultiTaskDataset d = random_dataset(2, 40, 10, rng, 1.0, 3);
  const PriorWeights pw = default_pw(2, 10, 5);
  IbssEngine engine(d, pw, 5, {});
  MuSusieFit fit = engine.fit();
  REQUIRE(fit.converged);
  const auto before = fit.beta_hat;
  engine.sweep();
  const MuSusieFit after = engine.fit();
  for (int k = 0; k < 2; ++k)
    CHECK((after.beta_hat[static_cast<std::size_t>(k)] - before[static_cast<std::size_t>(k)])
              .cwiseAbs()
              .maxCoeff() < 1e-6);
}

TEST_CASE("surplus effects beyond the model space converge to the null state") {
  Rng rng(31);
  const Index p = 2;
  const MultiTaskDataset d = random_dataset(1, 20, p, rng, 1.2, 1);
  const PriorWeights pw = derive_pi_from_omegas({1.0}, p, 8);
  const int L = 8;  // > p (2^K - 1) = 2
  const MuSusieFit fit = fit_ibss(d, L, pw);
  CHECK(fit.converged);
  int near_null = 0;
  for (const auto& post : fit.effects)
    if (post.alpha0 > 0.9) ++near_null;
  CHECK(near_null >= L - 2);
}

TEST_CASE("strong shared signals are fully recovered at moderate scale" * doctest::timeout(600)) {
  // n=500, p=1000, coefficients +-1 on the shared support: the shared
  // covariates must be selected in every data set in >= 19/20 replicates.
  Rng master(32);
  int good = 0;
  const Index n = 500, p = 1000;
  const int s1 = 10, s2 = 2, K = 2;
  const std::vector<double> omegas{omega_from_scaled_power(1.1, 2.0, p), 1.25};
  const PriorWeights pw = derive_pi_from_omegas(omegas, p, s1 + K * s2 + K);
  for (int rep = 0; rep < 20; ++rep) {
    Rng rng = master.spawn(static_cast<std::uint64_t>(rep));
    VsSimConfig cfg;
    cfg.p = p;
    cfg.n = n;
    cfg.K = K;
    cfg.s1_star = s1;
    cfg.s2_star = s2;
    cfg.sigma = 1.0;
    cfg.seed = rng.seed();
    VsInstance inst = gen_vs_instance(cfg);
    // strengthen to +-1 coefficients, regenerate responses
    for (int k = 0; k < K; ++k) {
      for (Index j = 0; j < p; ++j)
        if (inst.beta(k, j) != 0.0) inst.beta(k, j) = inst.beta(k, j) > 0 ? 1.0 : -1.0;
      inst.data.y[static_cast<std::size_t>(k)] =
          inst.data.X[static_cast<std::size_t>(k)] * inst.beta.row(k).transpose();
      for (Index i = 0; i < n; ++i) inst.data.y[static_cast<std::size_t>(k)](i) += rng.normal();
    }
    const MuSusieFit fit = fit_ibss(inst.data, s1 + K * s2 + K, pw);
    const auto sel = select_at_threshold(fit.pip, 0.5);
    bool ok = true;
    for (int k = 0; k < K && ok; ++k) {
      for (int j : inst.shared_support) {
        if (std::find(sel[static_cast<std::size_t>(k)].begin(), sel[static_cast<std::size_t>(k)].end(), j) ==
            sel[static_cast<std::size_t>(k)].end()) {
          ok = false;
          break;
        }
      }
    }
    good += ok;
  }
  CHECK(good >= 19);
}
