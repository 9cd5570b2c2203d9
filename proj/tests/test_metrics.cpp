#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "musel/metrics.hpp"
#include "musel/rng.hpp"

using namespace musel;

TEST_CASE("vs_metrics: exact recovery scores 1/1") {
  const auto m = vs_metrics({2, 5, 9}, {9, 2, 5});
  CHECK(m.sens == 1.0);
  CHECK(m.prec == 1.0);
  CHECK(m.sens_defined);
  CHECK(!m.prec_vacuous);
}

TEST_CASE("vs_metrics: direct counts") {
  // truth 1..10, selected 1..8 plus 11
  std::vector<int> truth, sel;
  for (int j = 1; j <= 10; ++j) truth.push_back(j);
  for (int j = 1; j <= 8; ++j) sel.push_back(j);
  sel.push_back(11);
  const auto m = vs_metrics(sel, truth);
  CHECK(m.sens == doctest::Approx(0.8));
  CHECK(m.prec == doctest::Approx(8.0 / 9.0));
}

TEST_CASE("vs_metrics: empty truth marks sens undefined; empty selection is vacuous") {
  const auto m1 = vs_metrics({1, 2}, {});
  CHECK(!m1.sens_defined);
  CHECK(std::isnan(m1.sens));
  CHECK(m1.prec == 0.0);

  const auto m2 = vs_metrics({}, {1, 2});
  CHECK(m2.prec == 1.0);
  CHECK(m2.prec_vacuous);
  CHECK(m2.sens == 0.0);
}

namespace {

Mat random_dag_adjacency(Index p, double density, Rng& rng) {
  Mat A = Mat::Zero(p, p);
  for (Index i = 0; i + 1 < p; ++i)
    for (Index j = i + 1; j < p; ++j)
      if (rng.uniform01() < density) A(i, j) = 1.0;
  return A;
}

}  // namespace

TEST_CASE("dag_metrics: estimate equal to truth is all-zero error") {
  Rng rng(71);
  const Mat A = random_dag_adjacency(12, 0.3, rng);
  const auto m = dag_metrics(A, A);
  CHECK(m.n_wrong == 0.0);
  CHECK(m.tp_rate == 1.0);
  CHECK(m.fp_rate == 0.0);
  CHECK(m.f_norm == 0.0);
}

TEST_CASE("dag_metrics: one extra and one missing edge count as two wrong") {
  Mat truth = Mat::Zero(5, 5);
  truth(0, 1) = 1.0;
  truth(1, 2) = 1.0;
  Mat est = Mat::Zero(5, 5);
  est(0, 1) = 1.0;
  est(3, 4) = 1.0;  // extra; (1,2) missing
  const auto m = dag_metrics(est, truth);
  CHECK(m.n_wrong == 2.0);
  CHECK(m.f_norm == 2.0);
  CHECK(m.tp_rate == doctest::Approx(0.5));
  CHECK(m.fp_rate == doctest::Approx(1.0 / 8.0));  // 10 pairs - 2 true
}

TEST_CASE("dag_metrics ignores direction: reversed edges count as recovered") {
  Mat truth = Mat::Zero(4, 4);
  truth(0, 2) = 1.0;
  Mat est = Mat::Zero(4, 4);
  est(2, 0) = 1.0;
  const auto m = dag_metrics(est, truth);
  CHECK(m.n_wrong == 0.0);
  CHECK(m.tp_rate == 1.0);
}

TEST_CASE("dag_metrics rejects shape mismatches") {
  CHECK_THROWS(dag_metrics(Mat::Zero(3, 4), Mat::Zero(4, 4)));
  CHECK_THROWS(dag_metrics(Mat::Zero(3, 3), Mat::Zero(4, 4)));
}

TEST_CASE("f_norm equals n_wrong exactly on hard graphs (random pairs)") {
  Rng rng(72);
  for (int trial = 0; trial < 1000; ++trial) {
    const Index p = 4 + static_cast<Index>(rng.uniform_int(8));
    const Mat truth = random_dag_adjacency(p, 0.3, rng);
    const Mat est = random_dag_adjacency(p, 0.3, rng);
    const auto m = dag_metrics(est, truth);
    CHECK(m.f_norm == m.n_wrong);
  }
}

TEST_CASE("metrics are invariant to a consistent node relabeling") {
  Rng rng(73);
  const Index p = 10;
  const Mat truth = random_dag_adjacency(p, 0.25, rng);
  Mat est = truth;
  est(0, 5) = 1.0 - est(0, 5);  // flip one pair
  const auto base = dag_metrics(est, truth);

  std::vector<int> perm(p);
  for (Index i = 0; i < p; ++i) perm[static_cast<std::size_t>(i)] = static_cast<int>(i);
  for (Index i = p - 1; i > 0; --i)
    std::swap(perm[static_cast<std::size_t>(i)],
              perm[static_cast<std::size_t>(rng.uniform_int(static_cast<std::uint64_t>(i + 1)))]);
  Mat pt = Mat::Zero(p, p), pe = Mat::Zero(p, p);
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < p; ++j) {
      pt(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]) = truth(i, j);
      pe(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]) = est(i, j);
    }
  const auto rel = dag_metrics(pe, pt);
  CHECK(rel.n_wrong == base.n_wrong);
  CHECK(rel.tp_rate == base.tp_rate);
  CHECK(rel.fp_rate == base.fp_rate);
  CHECK(rel.f_norm == doctest::Approx(base.f_norm).epsilon(1e-12));
}

TEST_CASE("probabilistic estimates: f_norm uses raw probabilities") {
  Mat truth = Mat::Zero(3, 3);
  truth(0, 1) = 1.0;
  Mat est = Mat::Zero(3, 3);
  est(0, 1) = 0.6;
  est(1, 2) = 0.3;
  const auto m = dag_metrics(est, truth, 0.5);
  CHECK(m.n_wrong == 0.0);  // 0.6 >= 0.5 recovered, 0.3 below threshold
  CHECK(m.f_norm == doctest::Approx(0.4 * 0.4 + 0.3 * 0.3 + 0.0).epsilon(1e-12));
}
