#pragma once

#include <vector>

#include "musel/common.hpp"

namespace musel {

// Variable-selection metrics. sens is NaN (sens_defined = false) when the
// true support is empty. An empty selection has no false positives, so prec
// is reported as 1.0 with prec_vacuous set.
struct VsMetrics {
  double sens = 0.0;
  double prec = 0.0;
  bool sens_defined = true;
  bool prec_vacuous = false;
};

// sens = |S cap S*| / |S*|, prec = |S cap S*| / |S|.
VsMetrics vs_metrics(const std::vector<int>& selected, const std::vector<int>& truth);

// Skeleton (direction-ignoring) DAG recovery metrics.
struct DagMetrics {
  double n_wrong = 0.0;  // |symmetric difference of skeletons|
  double tp_rate = 0.0;  // |true cap est| / |true|
  double fp_rate = 0.0;  // |est minus true| / (p(p-1)/2 - |true|)
  double f_norm = 0.0;   // sum_{i<j} (Rh_ij + Rh_ji - R_ij - R_ji)^2
};

// `estimated` may hold edge probabilities in [0,1] or a hard 0/1 adjacency;
// `truth` is binarized as (entry != 0). A skeleton edge {i,j} is declared
// when R_ij + R_ji >= threshold. f_norm uses the raw entries, so for hard
// graphs it equals n_wrong exactly.
DagMetrics dag_metrics(const Mat& estimated, const Mat& truth, double threshold = 0.5);

}  // namespace musel
