#include "musel/metrics.hpp"

#include <algorithm>
#include <limits>

namespace musel {

VsMetrics vs_metrics(const std::vector<int>& selected, const std::vector<int>& truth) {
  std::vector<int> s = selected, t = truth;
  std::sort(s.begin(), s.end());
  std::sort(t.begin(), t.end());
  std::vector<int> both;
  std::set_intersection(s.begin(), s.end(), t.begin(), t.end(), std::back_inserter(both));

  VsMetrics m;
  if (t.empty()) {
    m.sens = std::numeric_limits<double>::quiet_NaN();
    m.sens_defined = false;
  } else {
    m.sens = static_cast<double>(both.size()) / static_cast<double>(t.size());
  }
  if (s.empty()) {
    m.prec = 1.0;  // nothing selected, nothing wrong
    m.prec_vacuous = true;
  } else {
    m.prec = static_cast<double>(both.size()) / static_cast<double>(s.size());
  }
  return m;
}

DagMetrics dag_metrics(const Mat& estimated, const Mat& truth, double threshold) {
  check(estimated.rows() == estimated.cols(), "dag_metrics: estimated matrix must be square");
  check(truth.rows() == truth.cols(), "dag_metrics: truth matrix must be square");
  check(estimated.rows() == truth.rows(), "dag_metrics: p mismatch between estimate and truth");
  const Index p = truth.rows();

  DagMetrics m;
  long n_true = 0, n_est = 0, n_both = 0, n_extra = 0;
  for (Index i = 0; i + 1 < p; ++i) {
    for (Index j = i + 1; j < p; ++j) {
      const double eh = estimated(i, j) + estimated(j, i);
      const bool est_edge = eh >= threshold;
      const bool true_edge = truth(i, j) != 0.0 || truth(j, i) != 0.0;
      const double th = (truth(i, j) != 0.0 ? 1.0 : 0.0) + (truth(j, i) != 0.0 ? 1.0 : 0.0);
      m.f_norm += (eh - th) * (eh - th);
      n_true += true_edge;
      n_est += est_edge;
      n_both += (est_edge && true_edge);
      n_extra += (est_edge && !true_edge);
      m.n_wrong += (est_edge != true_edge);
    }
  }
  const long total_pairs = static_cast<long>(p) * (p - 1) / 2;
  m.tp_rate = n_true > 0 ? static_cast<double>(n_both) / static_cast<double>(n_true) : 1.0;
  m.fp_rate = (total_pairs - n_true) > 0
                  ? static_cast<double>(n_extra) / static_cast<double>(total_pairs - n_true)
                  : 0.0;
  return m;
}

}  // namespace musel
