#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "musel/indicators.hpp"
#include "musel/io.hpp"
#include "musel/prior.hpp"
#include "musel/rng.hpp"

using namespace musel;

namespace {

RIndicator make_r(int K, Index p, const std::vector<std::pair<int, Index>>& ones) {
  RIndicator r;
  r.bits = Eigen::MatrixXi::Zero(K, p);
  for (auto [k, j] : ones) r.bits(k, j) = 1;
  return r;
}

}  // namespace

TEST_CASE("r_to_gamma: single activation in data set 1 only") {
  // K=2, covariate 0 active in data set 1 only -> gamma^{1} has the bit
  const RIndicator r = make_r(2, 2, {{0, 0}});
  const GammaIndicator g = r_to_gamma(r);
  REQUIRE(g.size() == 1);
  CHECK(g.active[0].set.bits == 0b01u);
  CHECK(g.active[0].j == 0);
}

TEST_CASE("r_to_gamma: all-zero r gives empty gamma") {
  const GammaIndicator g = r_to_gamma(make_r(3, 4, {}));
  CHECK(g.size() == 0);
  const RIndicator r2 = gamma_to_r(g);
  CHECK(r2.bits.sum() == 0);
}

TEST_CASE("gamma_to_r: shared activation fans out to both data sets") {
  GammaIndicator g;
  g.K = 2;
  g.p = 4;
  g.active.push_back({SubsetIndex{0b11u}, 2});
  const RIndicator r = gamma_to_r(g);
  CHECK(r.bits(0, 2) == 1);
  CHECK(r.bits(1, 2) == 1);
  CHECK(r.bits.sum() == 2);
}

TEST_CASE("gamma_to_r rejects a covariate activated by two subsets") {
  GammaIndicator g;
  g.K = 2;
  g.p = 3;
  g.active.push_back({SubsetIndex{0b01u}, 1});
  g.active.push_back({SubsetIndex{0b10u}, 1});
  CHECK_THROWS(gamma_to_r(g));
}

TEST_CASE("indicator bijection holds exhaustively for K=3, p=3") {
  // every r in {0,1}^(3x3) round-trips through gamma
  for (int code = 0; code < (1 << 9); ++code) {
    RIndicator r;
    r.bits = Eigen::MatrixXi::Zero(3, 3);
    for (int b = 0; b < 9; ++b)
      if ((code >> b) & 1) r.bits(b / 3, b % 3) = 1;
    const GammaIndicator g = r_to_gamma(r);
    const RIndicator back = gamma_to_r(g);
    CHECK(back.bits == r.bits);
    // and gamma -> r -> gamma is the identity on valid gammas
    const GammaIndicator g2 = r_to_gamma(back);
    CHECK(g2 == g);
  }
}

TEST_CASE("gamma JSON round-trip") {
  GammaIndicator g;
  g.K = 3;
  g.p = 10;
  g.active.push_back({SubsetIndex{0b101u}, 3});
  g.active.push_back({SubsetIndex{0b010u}, 7});
  const GammaIndicator back = gamma_from_json(gamma_to_json(g));
  CHECK(back == g);
}

TEST_CASE("derive_pi_from_omegas: K=1 with p^(-omega) = 1/p forces pi_phi = 1/2") {
  const Index p = 17;
  const PriorWeights pw = derive_pi_from_omegas({1.0}, p, 3);
  // S = p * (1/p) = 1
  CHECK(pw.pi_phi == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(pw.pis[0] == doctest::Approx(1.0 / static_cast<double>(p)).epsilon(1e-12));
}

TEST_CASE("derive_pi_from_omegas satisfies the bridge identity and normalization") {
  const Index p = 600;
  const double w1 = omega_from_scaled_power(1.1, 2.0, p);
  const double w2 = 1.25;
  const PriorWeights pw = derive_pi_from_omegas({w1, w2}, p, 16);

  // pi_phi pi_k / (1 - pi_phi) = p^(-omega_k)
  for (int k = 1; k <= 2; ++k) {
    const double lhs = pw.pi_phi * pw.pis[static_cast<std::size_t>(k - 1)] / (1.0 - pw.pi_phi);
    const double rhs = std::exp(pw.log_w[static_cast<std::size_t>(k - 1)]);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
  // full pi vector sums to one: sum_k C(2,k) p pi_k
  const double total = 2.0 * p * pw.pis[0] + 1.0 * p * pw.pis[1];
  CHECK(std::abs(total - 1.0) < 1e-12);
  CHECK(pw.ordering_warning.empty());
}

TEST_CASE("derive_pi_from_omegas matches an independent bisection solve") {
  // Independent route: solve for pi_phi such that, with
  // pi_k = p^(-omega_k)(1-pi_phi)/pi_phi, the full vector sums to one.
  const Index p = 10;
  const std::vector<double> omegas{1.0, 1.5};
  const PriorWeights pw = derive_pi_from_omegas(omegas, p, 5);

  const auto total_mass = [&](double pi_phi) {
    double t = 0.0;
    const double binom[] = {2.0, 1.0};
    for (int k = 1; k <= 2; ++k) {
      const double w = std::pow(static_cast<double>(p), -omegas[static_cast<std::size_t>(k - 1)]);
      t += binom[k - 1] * static_cast<double>(p) * w * (1.0 - pi_phi) / pi_phi;
    }
    return t;
  };
  double lo = 1e-12, hi = 1.0 - 1e-12;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (total_mass(mid) > 1.0 ? lo : hi) = mid;
  }
  const double pi_phi_ref = 0.5 * (lo + hi);
  CHECK(pw.pi_phi == doctest::Approx(pi_phi_ref).epsilon(1e-10));
  for (int k = 1; k <= 2; ++k) {
    const double pi_ref = std::pow(static_cast<double>(p), -omegas[static_cast<std::size_t>(k - 1)]) *
                          (1.0 - pi_phi_ref) / pi_phi_ref;
    CHECK(pw.pis[static_cast<std::size_t>(k - 1)] == doctest::Approx(pi_ref).epsilon(1e-10));
  }
}

TEST_CASE("derive_pi_from_omegas rejects non-decreasing pi_k") {
  CHECK_THROWS(derive_pi_from_omegas({1.5, 1.0}, 20, 3));  // omega decreasing
  CHECK_THROWS(derive_pi_from_omegas({1.0, 1.0}, 20, 3));  // ties
}

TEST_CASE("eq-(8)-style ordering violation warns but does not throw") {
  // omega_2/2 >= omega_1 violates the shared-activation ordering
  const PriorWeights pw = derive_pi_from_omegas({1.0, 2.5}, 20, 3);
  CHECK(!pw.ordering_warning.empty());
}

TEST_CASE("log_prior_gamma: empty gamma is L log(1 - pi_phi)") {
  const PriorWeights pw = derive_pi_from_omegas({1.0, 1.5}, 25, 4);
  GammaIndicator g;
  g.K = 2;
  g.p = 25;
  CHECK(log_prior_gamma(g, pw) ==
        doctest::Approx(4.0 * std::log1p(-pw.pi_phi)).epsilon(1e-12));
}

TEST_CASE("log_prior_gamma: single activation matches direct substitution") {
  const PriorWeights pw = derive_pi_from_omegas({1.0, 1.5}, 25, 4);
  for (int card = 1; card <= 2; ++card) {
    GammaIndicator g;
    g.K = 2;
    g.p = 25;
    g.active.push_back({SubsetIndex{card == 1 ? 0b01u : 0b11u}, 7});
    const double expect = std::log(4.0)  // f(1, L) = L
                          + 3.0 * std::log1p(-pw.pi_phi) + std::log(pw.pi_phi) +
                          std::log(pw.pis[static_cast<std::size_t>(card - 1)]);
    CHECK(log_prior_gamma(g, pw) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("log_prior_gamma: single-effect priors sum consistently with normalization") {
  // Summing exp(log prior) over all single-activation gammas plus the empty
  // gamma's share reproduces the multinomial structure: with f(1,L)=L the
  // single-activation mass is L * pi_phi * (1-pi_phi)^(L-1) * pi_|I| per cell.
  const Index p = 6;
  const PriorWeights pw = derive_pi_from_omegas({1.2, 1.6, 2.1}, p, 3);
  double total = 0.0;
  for (std::uint32_t mask = 1; mask <= 7; ++mask) {
    for (Index j = 0; j < p; ++j) {
      GammaIndicator g;
      g.K = 3;
      g.p = p;
      g.active.push_back({SubsetIndex{mask}, j});
      total += std::exp(log_prior_gamma(g, pw));
    }
  }
  // sum over cells of pi_|I| is 1 by normalization, so the total is
  // L pi_phi (1-pi_phi)^(L-1).
  const double expect = 3.0 * pw.pi_phi * std::pow(1.0 - pw.pi_phi, 2.0);
  CHECK(total == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("log_prior_gamma rejects |gamma| > L") {
  const PriorWeights pw = derive_pi_from_omegas({1.0, 1.5}, 25, 1);
  GammaIndicator g;
  g.K = 2;
  g.p = 25;
  g.active.push_back({SubsetIndex{1u}, 0});
  g.active.push_back({SubsetIndex{1u}, 1});
  CHECK_THROWS(log_prior_gamma(g, pw));
}

TEST_CASE("merging duplicated singleton activations is favored when omega_2 < 2 omega_1") {
  // gamma: covariates 0 and 1 active separately in data sets 1 and 2;
  // gamma': covariate 0 active in both. Prior ratio must be
  // f(1,L)/f(2,L) * p^(2 omega_1 - omega_2).
  const Index p = 100;
  const int L = 5;
  for (auto [e1, d1, e2] : {std::tuple{1.25, 2.0, 1.5}, std::tuple{2.0, 2.0, 2.25}}) {
    const double w1 = omega_from_scaled_power(e1, d1, p);
    const double w2 = omega_from_scaled_power(e2, 1.0, p);
    const PriorWeights pw = derive_pi_from_omegas({w1, w2}, p, L);

    GammaIndicator split, merged;
    split.K = merged.K = 2;
    split.p = merged.p = p;
    split.active.push_back({SubsetIndex{0b01u}, 0});
    split.active.push_back({SubsetIndex{0b10u}, 1});
    merged.active.push_back({SubsetIndex{0b11u}, 0});

    const double log_ratio = log_prior_gamma(merged, pw) - log_prior_gamma(split, pw);
    const double expect =
        std::log(1.0 / static_cast<double>(L - 1)) +
        (2.0 * w1 - w2) * std::log(static_cast<double>(p));
    CHECK(log_ratio == doctest::Approx(expect).epsilon(1e-10));
    CHECK(log_ratio > 0.0);  // omega_2 < 2 omega_1 favors the merged model
  }
}

TEST_CASE("monotone penalty: one more activation multiplies mass by (L-m) p^(-omega_k)") {
  const Index p = 40;
  const PriorWeights pw = derive_pi_from_omegas({1.0, 1.4, 1.9}, p, 6);
  Rng rng(5);
  GammaIndicator g;
  g.K = 3;
  g.p = p;
  g.active.push_back({SubsetIndex{0b011u}, 3});
  g.active.push_back({SubsetIndex{0b100u}, 9});
  const double base = log_prior_gamma(g, pw);
  for (std::uint32_t mask = 1; mask <= 7; ++mask) {
    GammaIndicator g2 = g;
    g2.active.push_back({SubsetIndex{mask}, 20});
    const int card = SubsetIndex{mask}.cardinality();
    const double factor = log_prior_gamma(g2, pw) - base;
    // equals log[(L-m) pi_phi pi_card / (1-pi_phi)] = log(L-m) + log w_card
    const double expect = std::log(6.0 - 2.0) + pw.log_w[static_cast<std::size_t>(card - 1)];
    CHECK(factor == doctest::Approx(expect).epsilon(1e-10));
    CHECK(factor <= std::log(6.0) + pw.log_w[static_cast<std::size_t>(card - 1)] + 1e-12);
  }
}
