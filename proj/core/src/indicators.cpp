#include "musel/indicators.hpp"

#include <algorithm>
#include <string>

namespace musel {

GammaIndicator r_to_gamma(const RIndicator& r) {
  const int K = r.K();
  check(K >= 1 && K <= kMaxK, "r_to_gamma: K must be in 1..16");
  GammaIndicator g;
  g.K = K;
  g.p = r.p();
  for (Index j = 0; j < r.p(); ++j) {
    std::uint32_t mask = 0;
    for (int k = 0; k < K; ++k) {
      if (r.bits(k, j) != 0) mask |= (1u << k);
    }
    if (mask != 0) g.active.push_back({SubsetIndex{mask}, j});
  }
  return g;
}

RIndicator gamma_to_r(const GammaIndicator& gamma) {
  check(gamma.K >= 1 && gamma.K <= kMaxK, "gamma_to_r: K must be in 1..16");
  RIndicator r;
  r.bits = Eigen::MatrixXi::Zero(gamma.K, gamma.p);
  std::vector<bool> seen(static_cast<std::size_t>(gamma.p), false);
  for (const auto& a : gamma.active) {
    check(a.j >= 0 && a.j < gamma.p, "gamma_to_r: covariate index out of range");
    check(a.set.bits != 0 && a.set.bits < (1u << gamma.K),
          "gamma_to_r: subset mask out of range for K=" + std::to_string(gamma.K));
    check(!seen[static_cast<std::size_t>(a.j)],
          "gamma_to_r: covariate " + std::to_string(a.j + 1) +
              " activated by more than one subset (mutual exclusivity violated)");
    seen[static_cast<std::size_t>(a.j)] = true;
    for (int k = 0; k < gamma.K; ++k) {
      if (a.set.contains(k + 1)) r.bits(k, a.j) = 1;
    }
  }
  return r;
}

}  // namespace musel
