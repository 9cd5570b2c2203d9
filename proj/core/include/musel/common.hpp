#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

namespace musel {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

inline void check(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// log(exp(a) + exp(b)) without overflow; handles -inf identities.
inline double logaddexp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

constexpr double neg_inf = -std::numeric_limits<double>::infinity();

// log N(x; 0, sd^2)
inline double log_normal_pdf(double x, double sd) {
  static const double log_2pi = std::log(2.0 * M_PI);
  return -0.5 * log_2pi - std::log(sd) - 0.5 * (x / sd) * (x / sd);
}

}  // namespace musel
