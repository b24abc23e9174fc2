#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace eltd_test {

struct Rows {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd truth;
};

/// Uniform inputs on [-2, 2] with a known cubic target plus Gaussian noise.
inline Rows cubic_rows(std::uint64_t seed, Eigen::Index n, Eigen::Index vars, double noise_sd) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::normal_distribution<double> e(0.0, noise_sd);
  Rows r{Eigen::MatrixXd(n, vars), Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (Eigen::Index t = 0; t < n; ++t) {
    for (Eigen::Index c = 0; c < vars; ++c) r.x(t, c) = u(rng);
    const double a = r.x(t, 0), b = vars > 1 ? r.x(t, 1) : 0.0;
    r.truth(t) = 3.0 + 2.0 * a - b + 1.5 * a * a * a - 2.0 * a * b * b + 0.8 * b * b * b;
    r.y(t) = r.truth(t) + e(rng);
  }
  return r;
}

/// Many inputs, few rows: a degree-3 expansion has far more terms than samples.
/// Only the first two inputs drive the target.
inline Rows overfit_rows(std::uint64_t seed, Eigen::Index n = 80) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  const Eigen::Index vars = 7;
  Rows r{Eigen::MatrixXd(n, vars), Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (Eigen::Index t = 0; t < n; ++t) {
    for (Eigen::Index c = 0; c < vars; ++c) r.x(t, c) = g(rng);
    r.truth(t) = 4.0 * r.x(t, 0) - 3.0 * r.x(t, 1) + 1.0 * r.x(t, 0) * r.x(t, 1);
    r.y(t) = r.truth(t) + 1.0 * g(rng);
  }
  return r;
}

}  // namespace eltd_test
