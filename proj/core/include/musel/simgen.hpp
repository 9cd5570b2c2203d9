#pragma once

#include <vector>

#include "musel/dataset.hpp"
#include "musel/rng.hpp"

namespace musel {

// Multi-task variable-selection instance generator.
//
// Supports: s1_star covariates shared by all data sets, plus s2_star private
// covariates per data set; private sets are pairwise disjoint and disjoint
// from the shared set. Coefficients of active covariates are N(0, effect_sd^2)
// independently per (covariate, data set); X entries are standard normal;
// y = X beta + sigma * noise.
//
// Draw order from one seeded stream: shared support, private supports
// k = 1..K, then per data set k: coefficients (ascending j), X (column-major),
// noise. Same seed, same instance, on every platform.
struct VsSimConfig {
  Index p = 0;
  Index n = 0;
  int K = 1;
  int s1_star = 0;
  int s2_star = 0;
  double sigma = 1.0;
  double effect_sd = 0.6;
  std::uint64_t seed = 0;
};

struct VsInstance {
  MultiTaskDataset data;
  std::vector<int> shared_support;                // sorted
  std::vector<std::vector<int>> private_support;  // per k, sorted
  std::vector<std::vector<int>> support;          // union per k, sorted
  Mat beta;                                       // K x p true coefficients
};

VsInstance gen_vs_instance(const VsSimConfig& cfg);

// Multi-DAG structural-equation instance generator.
//
// True order is the identity, so true weighted adjacency matrices are
// strictly upper triangular. N_com edges are shared by all K DAGs; N_pri
// edges per DAG are private, drawn disjointly from the shared set and from
// each other. Nonzero weights are uniform on +-[w_lo, w_hi] independently per
// (edge, data set) -- including shared edges; node error variances are
// uniform on [v_lo, v_hi] independently per (node, data set). Columns are
// filled by ancestral sampling X_j = sum_{i<j} B_ij X_i + e_j.
struct DagSimConfig {
  Index p = 0;
  int K = 1;
  Index n_per_dataset = 0;
  int N_com = 0;
  int N_pri = 0;
  double weight_lo = 0.1, weight_hi = 1.0;
  double var_lo = 1.0, var_hi = 2.25;
  std::uint64_t seed = 0;
};

struct DagInstance {
  MultiTaskDataset data;                       // X only; y empty
  std::vector<std::pair<int, int>> common_edges;
  std::vector<std::vector<std::pair<int, int>>> private_edges;  // per k
  std::vector<Mat> B;          // K weighted adjacency matrices (p x p)
  std::vector<Mat> adjacency;  // K binary matrices
  std::vector<Vec> noise_var;  // K vectors of length p
};

DagInstance gen_dag_instance(const DagSimConfig& cfg);

}  // namespace musel
