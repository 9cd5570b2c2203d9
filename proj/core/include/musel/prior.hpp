#pragma once

#include <string>
#include <vector>

#include "musel/common.hpp"
#include "musel/indicators.hpp"

namespace musel {

// Prior parameterization shared by the model-space prior and the sum-of-
// single-effects prior. The bridge is
//
//   pi_phi * pi_k / (1 - pi_phi) = p^(-omega_k),
//
// and the remaining one-parameter freedom is resolved by making the full
// multinomial weight vector (pi_k repeated C(K,k)*p times) sum to one:
//
//   S = p * sum_k C(K,k) p^(-omega_k),  pi_phi = S/(S+1),  pi_k = p^(-omega_k)/S.
struct PriorWeights {
  std::vector<double> omegas;  // omega_1..omega_K
  double pi_phi = 0.0;
  std::vector<double> pis;    // pi_1..pi_K
  std::vector<double> log_w;  // log_w[k-1] = -omega_k * log(p)
  int L = 0;                  // max activated covariates
  Index p = 0;
  std::string ordering_warning;  // nonempty if omega_K/K < ... < omega_1 fails

  int K() const { return static_cast<int>(omegas.size()); }
  double log_pi(int card) const { return std::log(pis[static_cast<std::size_t>(card - 1)]); }
};

// K is omegas.size(). Requires all omega_k > 0, p >= 2, 1 <= K <= 16.
// Rejects parameter sets whose pi_k are not strictly decreasing in k.
// A violated omega_K/K < ... < omega_1 ordering only sets ordering_warning.
PriorWeights derive_pi_from_omegas(const std::vector<double>& omegas, Index p, int L);

// omega such that p^(-omega) = p^(-exponent) / divisor; the form used for
// reporting prior settings.
double omega_from_scaled_power(double exponent, double divisor, Index p);

// log prior mass of gamma under the single-effects prior with
// f(m, L) = L (L-1) ... (L-m+1):
//
//   log f(|g|, L) + sum_{(I,j) in g} [log pi_phi + log pi_|I|]
//     + (L - |g|) log(1 - pi_phi).
//
// Throws if |gamma| > L (model-space violation).
double log_prior_gamma(const GammaIndicator& gamma, const PriorWeights& pw);

}  // namespace musel
