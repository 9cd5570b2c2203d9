#pragma once

#include <optional>
#include <string>
#include <vector>

#include "musel/dag.hpp"
#include "musel/ibss.hpp"
#include "musel/metrics.hpp"
#include "musel/simgen.hpp"

namespace musel {

// Replicated simulate -> fit -> score pipelines behind `musel bench`.
// Replicate r draws its instance from master_seed spawn r; rows are ordered
// by replicate, and the summary row holds plain means, so repeated runs with
// one seed produce identical tables.

struct VsBenchConfig {
  VsSimConfig sim;                  // seed field ignored; per-replicate seeds derived
  std::vector<double> omegas;      // length K
  int L = 0;                        // 0 -> s* + K
  double threshold = 0.5;
  bool single_task = true;          // also fit each data set separately
  int single_L = 0;                 // 0 -> s1* + s2* + 1
  double single_omega = 1.0;        // p^(-omega) prior for the per-dataset fits
  IbssOptions ibss;
};

struct VsBenchRow {
  int rep = 0;
  std::uint64_t seed = 0;
  double sens_mu = 0.0, prec_mu = 0.0;
  double sens_si = 0.0, prec_si = 0.0;
};

struct VsBenchResult {
  std::vector<VsBenchRow> rows;
  VsBenchRow mean;  // rep = -1
};

VsBenchResult run_vs_bench(const VsBenchConfig& cfg, int replicates, std::uint64_t seed,
                           int threads = 1);

struct DagBenchConfig {
  DagSimConfig sim;  // seed field ignored
  std::vector<double> omegas;
  ChainOptions chain;
  DagOptions dag;
  double edge_threshold = 0.5;
};

struct DagBenchRow {
  int rep = 0;
  std::uint64_t seed = 0;
  double n_wrong = 0.0, tp = 0.0, fp = 0.0, f_norm = 0.0;
};

struct DagBenchResult {
  std::vector<DagBenchRow> rows;
  DagBenchRow mean;
};

DagBenchResult run_dag_bench(const DagBenchConfig& cfg, int replicates, std::uint64_t seed,
                             int threads = 1);

// CSV with one row per replicate plus a final "mean" summary row. Columns
// follow the reported tables: sens_mu,prec_mu,sens_si,prec_si and
// N_wrong,TP,FP,F-norm respectively.
std::string vs_bench_csv(const VsBenchResult& result);
std::string dag_bench_csv(const DagBenchResult& result);

}  // namespace musel
