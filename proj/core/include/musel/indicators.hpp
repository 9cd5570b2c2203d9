#pragma once

#include <cstdint>
#include <vector>

#include "musel/common.hpp"

namespace musel {

// Nonempty subset of {1..K} encoded as a K-bit mask: bit (k-1) set means
// data set k is a member. K is capped at 16.
struct SubsetIndex {
  std::uint32_t bits = 0;

  int cardinality() const { return __builtin_popcount(bits); }
  bool contains(int k) const { return (bits >> (k - 1)) & 1u; }  // k is 1-based
  bool operator==(const SubsetIndex&) const = default;
};

inline constexpr int kMaxK = 16;

// Number of nonempty subsets of {1..K}.
inline std::uint32_t subset_count(int K) { return (1u << K) - 1u; }

// Activation indicators r[k][j] for dataset k (0-based), covariate j.
struct RIndicator {
  Eigen::MatrixXi bits;  // K x p, entries 0/1

  int K() const { return static_cast<int>(bits.rows()); }
  Index p() const { return bits.cols(); }
};

// Sparse activation list: covariate j active exactly in the data sets of
// `set`. At most one entry per covariate (mutual exclusivity).
struct GammaActivation {
  SubsetIndex set;
  Index j = 0;  // 0-based covariate index
  bool operator==(const GammaActivation&) const = default;
};

struct GammaIndicator {
  int K = 0;
  Index p = 0;
  std::vector<GammaActivation> active;  // sorted by j, unique j

  Index size() const { return static_cast<Index>(active.size()); }  // |gamma|
  bool operator==(const GammaIndicator&) const = default;
};

// gamma[I, j] = 1 iff I = {k : r[k][j] = 1}; inactive columns set no bit.
GammaIndicator r_to_gamma(const RIndicator& r);

// r[k] = sum over I containing k of gamma[I]. Rejects gamma with a repeated
// covariate or with an out-of-range subset mask.
RIndicator gamma_to_r(const GammaIndicator& gamma);

}  // namespace musel
