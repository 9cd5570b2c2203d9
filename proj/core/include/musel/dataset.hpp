#pragma once

#include <vector>

#include "musel/common.hpp"

namespace musel {

// K design matrices and response vectors sharing p covariates. Responses may
// be absent (empty vectors) for structure-learning data, where each column of
// X takes its turn as the response.
//
// Immutable by convention after validate(); all fitting code takes it const.
struct MultiTaskDataset {
  std::vector<Mat> X;  // X[k]: n_k x p
  std::vector<Vec> y;  // y[k]: n_k (or empty)

  int K() const { return static_cast<int>(X.size()); }
  Index p() const { return X.empty() ? 0 : X[0].cols(); }
  Index n(int k) const { return X[static_cast<std::size_t>(k)].rows(); }
  Index total_n() const {
    Index t = 0;
    for (const auto& Xk : X) t += Xk.rows();
    return t;
  }
  bool has_responses() const;

  // Enforces: K >= 1, shared p, n_k >= 1, y_k matching n_k when present,
  // finite entries. Throws std::invalid_argument.
  void validate(bool require_responses = true) const;
};

// Sub-problem with the same X but substituted responses are frequent enough
// (IBSS residuals, per-node regressions) that we keep a helper here.
MultiTaskDataset subset_columns(const MultiTaskDataset& data, const std::vector<int>& cols,
                                const std::vector<Vec>& responses);

// Pooled variance of the responses around zero: sum_k ||y_k||^2 / sum_k n_k.
double pooled_response_variance(const std::vector<Vec>& responses);

}  // namespace musel
