#include "musel/dataset.hpp"

#include <string>

namespace musel {

bool MultiTaskDataset::has_responses() const {
  if (y.size() != X.size()) return false;
  for (std::size_t k = 0; k < X.size(); ++k)
    if (y[k].size() != X[k].rows()) return false;
  return !X.empty();
}

void MultiTaskDataset::validate(bool require_responses) const {
  check(!X.empty(), "dataset: K must be >= 1");
  const Index pc = X[0].cols();
  for (std::size_t k = 0; k < X.size(); ++k) {
    const auto& Xk = X[k];
    check(Xk.cols() == pc, "dataset: design matrices must share the column count p (data set " +
                               std::to_string(k + 1) + " has " + std::to_string(Xk.cols()) +
                               " columns, expected " + std::to_string(pc) + ")");
    check(Xk.rows() >= 1, "dataset: n_" + std::to_string(k + 1) + " must be >= 1");
    check(Xk.allFinite(), "dataset: non-finite entry in X_" + std::to_string(k + 1));
  }
  if (require_responses) {
    check(y.size() == X.size(), "dataset: missing response vectors");
    for (std::size_t k = 0; k < X.size(); ++k) {
      check(y[k].size() == X[k].rows(), "dataset: y_" + std::to_string(k + 1) +
                                            " length does not match X_" + std::to_string(k + 1) +
                                            " row count");
      check(y[k].allFinite(), "dataset: non-finite entry in y_" + std::to_string(k + 1));
    }
  }
}

MultiTaskDataset subset_columns(const MultiTaskDataset& data, const std::vector<int>& cols,
                                const std::vector<Vec>& responses) {
  MultiTaskDataset out;
  out.X.reserve(data.X.size());
  const Index m = static_cast<Index>(cols.size());
  for (const auto& Xk : data.X) {
    Mat sub(Xk.rows(), m);
    for (Index c = 0; c < m; ++c) sub.col(c) = Xk.col(cols[static_cast<std::size_t>(c)]);
    out.X.push_back(std::move(sub));
  }
  out.y = responses;
  return out;
}

double pooled_response_variance(const std::vector<Vec>& responses) {
  double ss = 0.0;
  Index n = 0;
  for (const auto& yk : responses) {
    ss += yk.squaredNorm();
    n += yk.size();
  }
  return n > 0 ? ss / static_cast<double>(n) : 0.0;
}

}  // namespace musel
