#include "musel/simgen.hpp"

#include <algorithm>

namespace musel {

namespace {

// Draw k entries without replacement from `avail`, removing them; returned
// sorted ascending.
std::vector<int> draw_from_pool(std::vector<int>& avail, int k, Rng& rng) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    const auto idx = static_cast<std::size_t>(rng.uniform_int(avail.size()));
    out.push_back(avail[idx]);
    avail[idx] = avail.back();
    avail.pop_back();
  }
  std::sort(out.begin(), out.end());
  return out;
}

Mat standard_normal_matrix(Index rows, Index cols, Rng& rng) {
  Mat m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

}  // namespace

VsInstance gen_vs_instance(const VsSimConfig& cfg) {
  check(cfg.p >= 1 && cfg.n >= 1 && cfg.K >= 1, "gen_vs_instance: p, n, K must be >= 1");
  check(cfg.s1_star >= 0 && cfg.s2_star >= 0, "gen_vs_instance: support sizes must be >= 0");
  check(cfg.s1_star + cfg.K * cfg.s2_star <= cfg.p,
        "gen_vs_instance: s1* + K s2* exceeds p (infeasible supports)");
  check(cfg.sigma >= 0.0 && cfg.effect_sd >= 0.0, "gen_vs_instance: sigma, effect_sd must be >= 0");

  Rng rng(cfg.seed);
  VsInstance inst;

  std::vector<int> avail(static_cast<std::size_t>(cfg.p));
  for (Index j = 0; j < cfg.p; ++j) avail[static_cast<std::size_t>(j)] = static_cast<int>(j);
  inst.shared_support = draw_from_pool(avail, cfg.s1_star, rng);
  for (int k = 0; k < cfg.K; ++k)
    inst.private_support.push_back(draw_from_pool(avail, cfg.s2_star, rng));

  inst.beta = Mat::Zero(cfg.K, cfg.p);
  inst.data.X.reserve(static_cast<std::size_t>(cfg.K));
  inst.data.y.reserve(static_cast<std::size_t>(cfg.K));
  for (int k = 0; k < cfg.K; ++k) {
    std::vector<int> sup = inst.shared_support;
    sup.insert(sup.end(), inst.private_support[static_cast<std::size_t>(k)].begin(),
               inst.private_support[static_cast<std::size_t>(k)].end());
    std::sort(sup.begin(), sup.end());
    inst.support.push_back(sup);
    for (int j : sup) inst.beta(k, j) = cfg.effect_sd * rng.normal();

    Mat X = standard_normal_matrix(cfg.n, cfg.p, rng);
    Vec y = X * inst.beta.row(k).transpose();
    for (Index i = 0; i < cfg.n; ++i) y(i) += cfg.sigma * rng.normal();
    inst.data.X.push_back(std::move(X));
    inst.data.y.push_back(std::move(y));
  }
  return inst;
}

DagInstance gen_dag_instance(const DagSimConfig& cfg) {
  check(cfg.p >= 1 && cfg.n_per_dataset >= 1 && cfg.K >= 1,
        "gen_dag_instance: p, n, K must be >= 1");
  const long max_edges = static_cast<long>(cfg.p) * (cfg.p - 1) / 2;
  check(cfg.N_com >= 0 && cfg.N_pri >= 0, "gen_dag_instance: edge counts must be >= 0");
  check(cfg.N_com + static_cast<long>(cfg.K) * cfg.N_pri <= max_edges,
        "gen_dag_instance: N_com + K N_pri exceeds p(p-1)/2 (infeasible edge sets)");
  check(0.0 < cfg.weight_lo && cfg.weight_lo <= cfg.weight_hi,
        "gen_dag_instance: bad weight range");
  check(0.0 < cfg.var_lo && cfg.var_lo <= cfg.var_hi, "gen_dag_instance: bad variance range");

  Rng rng(cfg.seed);
  DagInstance inst;

  // Upper-triangular pairs (i < j) indexed lexicographically.
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(static_cast<std::size_t>(max_edges));
  for (int i = 0; i + 1 < cfg.p; ++i)
    for (int j = i + 1; j < cfg.p; ++j) pairs.emplace_back(i, j);

  std::vector<int> avail(pairs.size());
  for (std::size_t t = 0; t < pairs.size(); ++t) avail[t] = static_cast<int>(t);
  const auto to_edges = [&pairs](const std::vector<int>& idx) {
    std::vector<std::pair<int, int>> es;
    es.reserve(idx.size());
    for (int t : idx) es.push_back(pairs[static_cast<std::size_t>(t)]);
    return es;
  };
  inst.common_edges = to_edges(draw_from_pool(avail, cfg.N_com, rng));
  for (int k = 0; k < cfg.K; ++k)
    inst.private_edges.push_back(to_edges(draw_from_pool(avail, cfg.N_pri, rng)));

  for (int k = 0; k < cfg.K; ++k) {
    std::vector<std::pair<int, int>> edges = inst.common_edges;
    edges.insert(edges.end(), inst.private_edges[static_cast<std::size_t>(k)].begin(),
                 inst.private_edges[static_cast<std::size_t>(k)].end());
    std::sort(edges.begin(), edges.end());

    Mat B = Mat::Zero(cfg.p, cfg.p);
    Mat A = Mat::Zero(cfg.p, cfg.p);
    for (const auto& [i, j] : edges) {
      const double mag = rng.uniform(cfg.weight_lo, cfg.weight_hi);
      const double sign = rng.uniform01() < 0.5 ? -1.0 : 1.0;
      B(i, j) = sign * mag;
      A(i, j) = 1.0;
    }
    Vec nv(cfg.p);
    for (Index j = 0; j < cfg.p; ++j) nv(j) = rng.uniform(cfg.var_lo, cfg.var_hi);

    // Ancestral sampling along the identity order: X_j = sum_{i<j} B_ij X_i + e_j.
    Mat X(cfg.n_per_dataset, cfg.p);
    for (Index j = 0; j < cfg.p; ++j) {
      Vec col(cfg.n_per_dataset);
      const double sd = std::sqrt(nv(j));
      for (Index i = 0; i < cfg.n_per_dataset; ++i) col(i) = sd * rng.normal();
      for (Index i = 0; i < j; ++i) {
        if (B(i, j) != 0.0) col += B(i, j) * X.col(i);
      }
      X.col(j) = col;
    }
    inst.B.push_back(std::move(B));
    inst.adjacency.push_back(std::move(A));
    inst.noise_var.push_back(std::move(nv));
    inst.data.X.push_back(std::move(X));
  }
  return inst;
}

}  // namespace musel
