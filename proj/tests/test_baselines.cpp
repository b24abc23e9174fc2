#include <doctest.h>

#include <random>

#include "eltd/baselines.hpp"
#include "eltd/stats.hpp"
#include "eltd/synth.hpp"
#include "support.hpp"

using namespace eltd;
using eltd_test::code_of;

namespace {

ModelAxes axes_for(std::size_t factors, std::size_t locations = 1) {
  std::vector<MetFactor> f(all_factors().begin(), all_factors().begin() + static_cast<std::ptrdiff_t>(factors));
  return {FactorSet(f), locations == 1 ? LocationMode::ReceiverOnly : LocationMode::Path, locations, {}};
}

std::vector<double> row(const Eigen::MatrixXd& m, Eigen::Index r) {
  std::vector<double> out(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index c = 0; c < m.cols(); ++c) out[static_cast<std::size_t>(c)] = m(r, c);
  return out;
}

double train_rmse(const auto& model, const Eigen::MatrixXd& x, std::span<const double> y) {
  std::vector<double> pred;
  for (Eigen::Index r = 0; r < x.rows(); ++r) pred.push_back(model.predict_vector(row(x, r)));
  return stats::rmse(y, pred);
}

}  // namespace

TEST_CASE("adam") {
  // minimise (theta - 3)^2
  Adam adam(1, 0.1);
  std::vector<double> theta{0.0};
  for (int i = 0; i < 2000; ++i) {
    const std::vector<double> g{2.0 * (theta[0] - 3.0)};
    adam.step(theta, g);
  }
  CHECK(theta[0] == doctest::Approx(3.0).epsilon(1e-3));
}

TEST_CASE("bpnn") {
  SUBCASE("xor") {
    Eigen::MatrixXd x(4, 2);
    x << 0, 0, 0, 1, 1, 0, 1, 1;
    const std::vector<double> y{0, 1, 1, 0};
    bpnn::Config cfg;
    cfg.hidden = 8;
    cfg.learning_rate = 0.01;
    cfg.max_iterations = 5000;
    cfg.tolerance = 0.0;
    const auto res = bpnn::train_matrix(x, y, cfg, axes_for(2));
    CHECK(res.trace.loss.back() < 1e-2);
  }
  SUBCASE("zero iterations") {
    Eigen::MatrixXd x(3, 1);
    x << 1, 2, 4;
    const std::vector<double> y{1, 3, 2};
    bpnn::Config cfg;
    cfg.max_iterations = 0;
    const auto res = bpnn::train_matrix(x, y, cfg, axes_for(1));
    CHECK(res.trace.loss.size() == 1);
    const auto init = Mlp::random(1, cfg.hidden, cfg.seed);
    const auto& s = res.model.scaler();
    const std::vector<double> z{(2.0 - s.means()[0]) / s.sds()[0]};
    CHECK(res.model.predict_vector(std::vector<double>{2.0}) ==
          doctest::Approx(res.model.y_mean() + res.model.y_sd() * init.forward_one(z)));
  }
  SUBCASE("linear target against least squares") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXd x(200, 3), aug(200, 4);
    std::vector<double> y(200);
    for (int t = 0; t < 200; ++t) {
      for (int c = 0; c < 3; ++c) x(t, c) = g(rng);
      y[static_cast<std::size_t>(t)] = 2.0 * x(t, 0) - x(t, 1) + 0.5 * x(t, 2) + 0.3 * g(rng);
      aug(t, 0) = 1.0;
      aug.block(t, 1, 1, 3) = x.row(t);
    }
    const auto beta = synth::ols_oracle(aug, y);
    std::vector<double> ols;
    for (int t = 0; t < 200; ++t) {
      double v = beta[0];
      for (int c = 0; c < 3; ++c) v += beta[static_cast<std::size_t>(c) + 1] * x(t, c);
      ols.push_back(v);
    }
    bpnn::Config cfg;
    cfg.learning_rate = 0.01;
    const auto res = bpnn::train_matrix(x, y, cfg, axes_for(3));
    CHECK(train_rmse(res.model, x, y) <= 1.1 * stats::rmse(y, ols));
  }
}

TEST_CASE("grnn") {
  Eigen::MatrixXd one(2, 1);
  one << 1.0, 2.0;
  const std::vector<double> q{5.0, -5.0};
  CHECK(grnn::estimate(q, one, std::vector<double>{3.5}, 0.1) == 3.5);

  Eigen::MatrixXd pair(1, 2);
  pair << -1.0, 1.0;
  CHECK(grnn::estimate(std::vector<double>{0.0}, pair, std::vector<double>{2.0, 6.0}, 0.7) ==
        doctest::Approx(4.0).epsilon(1e-14));

  Eigen::MatrixXd four(2, 4);
  four << 0.0, 1.0, -0.5, 2.0, 0.3, -1.0, 0.8, 0.1;
  const std::vector<double> y4{1.0, -2.0, 4.0, 0.5}, q4{0.4, 0.2}, tied{1.0, 1.0};
  double num = 0, den = 0;
  for (int t = 0; t < 4; ++t) {
    double d = 0;
    for (int j = 0; j < 2; ++j) d += (q4[static_cast<std::size_t>(j)] - four(j, t)) * (q4[static_cast<std::size_t>(j)] - four(j, t));
    num += std::exp(-d / 2.0) * y4[static_cast<std::size_t>(t)];
    den += std::exp(-d / 2.0);
  }
  CHECK(std::abs(grnn::estimate(q4, four, y4, 1.0) - num / den) < 1e-12);
  CHECK(std::abs(grnn::estimate(q4, four, y4, 1.0) - synth::kernel_oracle(q4, four, y4, tied)) < 1e-12);

  SUBCASE("trace has one entry") {
    Eigen::MatrixXd x(30, 2);
    std::vector<double> y(30);
    for (int t = 0; t < 30; ++t) {
      x(t, 0) = std::sin(t * 0.7);
      x(t, 1) = std::cos(t * 0.3);
      y[static_cast<std::size_t>(t)] = x(t, 0) + x(t, 1);
    }
    const auto res = grnn::train_matrix(x, y, grnn::Config{}, axes_for(2));
    CHECK(res.trace.loss.size() == 1);
    CHECK(res.model.sigma() > 0.0);
  }
}

TEST_CASE("mixture of experts") {
  const Standardizer id({0.0, 0.0}, {1.0, 1.0});
  Mlp a = Mlp::random(1, 3, 1), b = Mlp::random(1, 3, 2);
  Eigen::MatrixXd gw = Eigen::MatrixXd::Zero(2, 2);
  Eigen::VectorXd gb(2);
  gb << 1.0, 0.0;
  const std::vector<double> z{0.4, -0.9};

  SUBCASE("cold gate selects one expert") {
    const moe::Model m({a, b}, gw, gb, 1e-3, id, 0.0, 1.0, axes_for(1, 2));
    const auto g = m.gate_weights(z);
    CHECK(g[0] + g[1] == doctest::Approx(1.0));
    CHECK(m.predict_vector(z) == doctest::Approx(m.expert_outputs(z)[0]).epsilon(1e-12));
  }
  SUBCASE("identical experts ignore the gate") {
    const moe::Model m1({a, a}, gw, gb, 1.0, id, 0.0, 1.0, axes_for(1, 2));
    Eigen::VectorXd other(2);
    other << -3.0, 2.0;
    const moe::Model m2({a, a}, gw, other, 1.0, id, 0.0, 1.0, axes_for(1, 2));
    // both experts see different group means, so compare on equal groups
    const std::vector<double> same{0.4, 0.4};
    CHECK(m1.predict_vector(same) == doctest::Approx(m2.predict_vector(same)).epsilon(1e-12));
  }
  SUBCASE("gate weights sum to one") {
    moe::Config cfg;
    cfg.experts = 3;
    cfg.max_iterations = 10;
    Eigen::MatrixXd x(20, 3);
    std::vector<double> y(20);
    for (int t = 0; t < 20; ++t) {
      for (int c = 0; c < 3; ++c) x(t, c) = std::sin(0.3 * t + c);
      y[static_cast<std::size_t>(t)] = x(t, 0);
    }
    const auto res = moe::train_matrix(x, y, cfg, axes_for(1, 3));
    for (int t = 0; t < 20; ++t) {
      const auto g = res.model.gate_weights(row(x, t));
      CHECK(g[0] + g[1] + g[2] == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  SUBCASE("two regimes: the mixture beats one expert of the same width") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const int n = 400;
    Eigen::MatrixXd flat(n, 2), grouped(n, 4);
    std::vector<double> y(n);
    for (int t = 0; t < n; ++t) {
      const double s = u(rng), r = u(rng);
      flat.row(t) << s, r;
      grouped.row(t) << s, r, s, r;
      y[static_cast<std::size_t>(t)] = r > 0.0 ? 3.0 * s + 1.0 : -2.0 * s - 1.0;
    }
    moe::Config mc;
    mc.experts = 2;
    mc.hidden = 4;
    mc.learning_rate = 0.01;
    const auto mix = moe::train_matrix(grouped, y, mc, axes_for(2, 2));
    bpnn::Config bc;
    bc.hidden = 4;
    bc.learning_rate = 0.01;
    const auto single = bpnn::train_matrix(flat, y, bc, axes_for(2));
    const double rm = train_rmse(mix.model, grouped, y), rs = train_rmse(single.model, flat, y);
    CAPTURE(rs);
    CHECK(rm < rs);
    CHECK(rm < 0.15 * stats::sample_sd(y));
  }
}

TEST_CASE("moe group inputs") {
  // 4 locations x 2 factors into 2 groups
  const std::vector<double> slab{1, 10, 3, 30, 5, 50, 7, 70};
  std::vector<double> out(4);
  moe::group_inputs(slab, 4, 2, 2, out);
  CHECK(out == std::vector<double>{2, 20, 6, 60});
  std::vector<double> few(6);
  moe::group_inputs(std::vector<double>{1, 2}, 1, 2, 3, few);
  CHECK(few == std::vector<double>{1, 2, 1, 2, 1, 2});
}
