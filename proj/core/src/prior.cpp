#include "musel/prior.hpp"

#include <cmath>
#include <iostream>
#include <sstream>

namespace musel {

namespace {

// C(K, k) in double precision; K <= 16 keeps this exact.
double binom(int K, int k) {
  double v = 1.0;
  for (int i = 0; i < k; ++i) v = v * static_cast<double>(K - i) / static_cast<double>(i + 1);
  return v;
}

}  // namespace

double omega_from_scaled_power(double exponent, double divisor, Index p) {
  check(p >= 2, "omega_from_scaled_power: p must be >= 2");
  check(divisor > 0, "omega_from_scaled_power: divisor must be positive");
  // p^(-omega) = p^(-exponent)/divisor  =>  omega = exponent + log(divisor)/log(p)
  return exponent + std::log(divisor) / std::log(static_cast<double>(p));
}

PriorWeights derive_pi_from_omegas(const std::vector<double>& omegas, Index p, int L) {
  const int K = static_cast<int>(omegas.size());
  check(K >= 1 && K <= kMaxK, "derive_pi_from_omegas: K must be in 1..16");
  check(p >= 2, "derive_pi_from_omegas: p must be >= 2");
  check(L >= 1, "derive_pi_from_omegas: L must be >= 1");
  for (double w : omegas) check(w > 0.0, "derive_pi_from_omegas: omegas must be positive");

  PriorWeights pw;
  pw.omegas = omegas;
  pw.L = L;
  pw.p = p;
  pw.log_w.resize(omegas.size());
  const double logp = std::log(static_cast<double>(p));
  for (int k = 0; k < K; ++k) pw.log_w[static_cast<std::size_t>(k)] = -omegas[static_cast<std::size_t>(k)] * logp;

  // S = p * sum_k C(K,k) p^(-omega_k); pi_phi = S/(S+1); pi_k = p^(-omega_k)/S
  double S = 0.0;
  for (int k = 1; k <= K; ++k)
    S += binom(K, k) * static_cast<double>(p) * std::exp(pw.log_w[static_cast<std::size_t>(k - 1)]);
  pw.pi_phi = S / (S + 1.0);
  pw.pis.resize(omegas.size());
  for (int k = 1; k <= K; ++k)
    pw.pis[static_cast<std::size_t>(k - 1)] = std::exp(pw.log_w[static_cast<std::size_t>(k - 1)]) / S;

  for (int k = 1; k < K; ++k) {
    check(pw.pis[static_cast<std::size_t>(k - 1)] > pw.pis[static_cast<std::size_t>(k)],
          "derive_pi_from_omegas: pi_k must be strictly decreasing in k (omegas must be "
          "strictly increasing)");
  }

  // omega_K/K < omega_{K-1}/(K-1) < ... < omega_1 reflects shared-activation
  // preference; other choices are allowed, so only warn.
  for (int k = 1; k < K; ++k) {
    const double lhs = omegas[static_cast<std::size_t>(k)] / static_cast<double>(k + 1);
    const double rhs = omegas[static_cast<std::size_t>(k - 1)] / static_cast<double>(k);
    if (!(lhs < rhs)) {
      std::ostringstream os;
      os << "prior ordering omega_" << (k + 1) << "/" << (k + 1) << " < omega_" << k << "/" << k
         << " violated (" << lhs << " >= " << rhs << ")";
      pw.ordering_warning = os.str();
      std::cerr << "musel: warning: " << pw.ordering_warning << "\n";
      break;
    }
  }
  return pw;
}

double log_prior_gamma(const GammaIndicator& gamma, const PriorWeights& pw) {
  check(gamma.K == pw.K(), "log_prior_gamma: K mismatch");
  const Index m = gamma.size();
  check(m <= pw.L, "log_prior_gamma: |gamma| exceeds L (outside the model space)");
  // validates mutual exclusivity as a side effect
  (void)gamma_to_r(gamma);

  double lp = 0.0;
  for (Index i = 0; i < m; ++i) lp += std::log(static_cast<double>(pw.L - i));  // log f(m, L)
  const double log_pi_phi = std::log(pw.pi_phi);
  for (const auto& a : gamma.active) lp += log_pi_phi + pw.log_pi(a.set.cardinality());
  lp += static_cast<double>(pw.L - m) * std::log1p(-pw.pi_phi);
  return lp;
}

}  // namespace musel
