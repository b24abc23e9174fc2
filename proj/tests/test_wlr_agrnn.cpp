#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "eltd/stats.hpp"
#include "eltd/synth.hpp"
#include "eltd/wlr_agrnn.hpp"
#include "support.hpp"
#include "toy_data.hpp"

using namespace eltd;
using namespace eltd::wlr_agrnn;
using eltd_test::code_of;

namespace {

Eigen::MatrixXd random_bank(std::mt19937_64& rng, Eigen::Index l, Eigen::Index T) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd b(l, T);
  for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = g(rng);
  return b;
}

Problem toy_problem(std::uint64_t seed, std::size_t T, std::size_t l, std::size_t n) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Problem p;
  for (std::size_t t = 0; t < T; ++t) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
    p.x.push_back(x);
    p.y.push_back(10.0 * g(rng));
    p.w.push_back(0.5 + std::abs(g(rng)));
  }
  for (std::size_t j = 0; j < l; ++j) p.h_weight.push_back(0.7 + 0.3 * static_cast<double>(j));
  return p;
}

}  // namespace

TEST_CASE("wlr forward") {
  auto p = WlrParams::zeros(3, 3);
  p.w1.setIdentity();
  p.w2.setOnes();
  const std::vector<double> x{1, 2, 3};
  CHECK(wlr_forward(p, x) == 6.0);
  auto z = WlrParams::zeros(4, 3);
  z.b2 = -2.5;
  CHECK(wlr_forward(z, x) == -2.5);

  const auto r = WlrParams::random(5, 3, 17);
  double naive = r.b2;
  for (int h = 0; h < 5; ++h) {
    double a = r.b1(h);
    for (int i = 0; i < 3; ++i) a += r.w1(h, i) * x[static_cast<std::size_t>(i)];
    naive += r.w2(h) * a;
  }
  CHECK(std::abs(wlr_forward(r, x) - naive) < 1e-12);
  CHECK(code_of([&] { wlr_forward(r, std::vector<double>{1.0}); }) == ErrorCode::DimensionMismatch);

  auto copy = WlrParams::zeros(5, 3);
  copy.assign(r.flatten());
  CHECK(copy.flatten() == r.flatten());
}

TEST_CASE("elevation weighting") {
  const ElevationWeighting def{};
  const std::vector<double> ones{1, 1}, h{100, 200};
  const auto w = elevation_weight(ones, h, def);
  CHECK(w[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(w[1] == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  const std::vector<double> flat{350, 350, 350}, xhat{2, -1, 5};
  CHECK(elevation_weight(xhat, flat, def) == xhat);
  const std::vector<double> sea{0.0, 99.0};
  const auto s = elevation_weight(ones, sea, def);
  CHECK(s[0] > 0.0);
  CHECK(s[0] == doctest::Approx(1.0 / 50.0));
  CHECK(code_of([&] { elevation_weight(ones, flat, def); }) == ErrorCode::LengthMismatch);
}

TEST_CASE("elevation weights cancel under sd-proportional sigmas") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd bank(3, 40);
  for (Eigen::Index i = 0; i < bank.size(); ++i) bank.data()[i] = g(rng);
  std::vector<double> y(40), w(40, 1.0);
  for (auto& v : y) v = g(rng);
  const std::vector<double> h{0.3, 1.0, 2.7}, q{0.2, -0.4, 1.1};
  Eigen::MatrixXd scaled = bank;
  std::vector<double> qs(3);
  for (Eigen::Index j = 0; j < 3; ++j) {
    scaled.row(j) *= h[static_cast<std::size_t>(j)];
    qs[static_cast<std::size_t>(j)] = q[static_cast<std::size_t>(j)] * h[static_cast<std::size_t>(j)];
  }
  const auto a = select_sigmas(bank, y, w), b = select_sigmas(scaled, y, w);
  CHECK(b.scale == doctest::Approx(a.scale).epsilon(1e-9));
  CHECK(agrnn_predict(qs, scaled, y, b.sigmas).value ==
        doctest::Approx(agrnn_predict(q, bank, y, a.sigmas).value).epsilon(1e-9));
}

TEST_CASE("agrnn prediction") {
  Eigen::MatrixXd one(2, 1);
  one << 3.0, -1.0;
  const std::vector<double> y1{7.0}, q{100.0, 100.0}, s2{0.5, 2.0};
  CHECK(agrnn_predict(q, one, y1, s2).value == 7.0);

  Eigen::MatrixXd two(2, 2);
  two << 0.0, 2.0, 0.0, 4.0;  // columns (0,0) and (2,4)
  const std::vector<double> y2{10.0, 20.0}, mid{1.0, 2.0}, aniso{1.0, 2.0};
  CHECK(agrnn_predict(mid, two, y2, aniso).value == doctest::Approx(15.0).epsilon(1e-14));

  Eigen::MatrixXd three(2, 3);
  three << 0.1, 0.4, -0.3, 1.2, 0.8, 0.5;
  const std::vector<double> y3{1.0, 5.0, -2.0}, q3{0.2, 0.9}, s3{0.3, 0.7};
  CHECK(std::abs(agrnn_predict(q3, three, y3, s3).value - synth::kernel_oracle(q3, three, y3, s3)) < 1e-12);

  // far-away query: raw weights would underflow, the shifted ones keep the nearest column
  const std::vector<double> far{1e6, 1e6}, tiny{1e-3, 1e-3};
  const auto fb = agrnn_predict(far, three, y3, tiny);
  CHECK(fb.value == doctest::Approx(1.0));  // column 0 is closest along the diagonal

  CHECK(code_of([&] { agrnn_predict(q3, Eigen::MatrixXd(2, 0), std::vector<double>{}, s3); }) == ErrorCode::EmptyBank);
}

TEST_CASE("sigma selection") {
  std::mt19937_64 rng(21);
  auto bank = random_bank(rng, 3, 40);
  std::vector<double> y(40), w(40, 1.0);
  for (int t = 0; t < 40; ++t) y[static_cast<std::size_t>(t)] = 3.0 * bank(0, t) - bank(2, t) * bank(1, t);

  SUBCASE("equal row spreads give tied sigmas") {
    Eigen::MatrixXd tied(2, 4);
    tied << 1, 2, 3, 4, 4, 3, 2, 1;
    const std::vector<double> yy{1, 2, 3, 4}, ww(4, 1.0);
    const auto sel = select_sigmas(tied, yy, ww);
    CHECK(sel.sigmas[0] == sel.sigmas[1]);
  }
  SUBCASE("row scaling scales its sigma and leaves predictions alone") {
    const auto a = select_sigmas(bank, y, w);
    Eigen::MatrixXd scaled = bank;
    scaled.row(1) *= 10.0;
    const auto b = select_sigmas(scaled, y, w);
    CHECK(b.sigmas[1] == doctest::Approx(10.0 * a.sigmas[1]).epsilon(1e-9));
    CHECK(b.sigmas[0] == doctest::Approx(a.sigmas[0]).epsilon(1e-9));
    const std::vector<double> q{0.3, -0.2, 0.5}, q10{0.3, -2.0, 0.5};
    CHECK(agrnn_predict(q10, scaled, y, b.sigmas).value ==
          doctest::Approx(agrnn_predict(q, bank, y, a.sigmas).value).epsilon(1e-9));
  }
  SUBCASE("two columns: each target is predicted by the other") {
    Eigen::MatrixXd two(2, 2);
    two << 0.0, 1.0, 3.0, -1.0;
    const std::vector<double> yy{4.0, 9.0}, ww{2.0, 0.5};
    const auto sd = bank_row_sd(two);
    for (double c : {0.1, 0.7, 2.9}) CHECK(loo_wrss(two, yy, ww, sd, c) == doctest::Approx(2.5 * 25.0));
  }
  SUBCASE("golden section agrees with a brute-force scan") {
    const auto sel = select_sigmas(bank, y, w);
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 2900; ++k) best = std::min(best, loo_wrss(bank, y, w, sel.row_sd, 0.1 + 0.001 * k));
    CHECK(sel.loo_wrss <= best * (1.0 + 1e-4));
    CHECK(sel.loo_wrss == doctest::Approx(loo_wrss(bank, y, w, sel.row_sd, sel.scale)).epsilon(1e-12));
  }
  SUBCASE("leave-out window") {
    std::vector<std::int64_t> hours(40);
    std::iota(hours.begin(), hours.end(), 0);
    const LooExclusion none{}, wide{hours, 3};
    const auto sd = bank_row_sd(bank);
    CHECK(loo_wrss(bank, y, w, sd, 0.5, none) == loo_wrss(bank, y, w, sd, 0.5, LooExclusion{hours, 0}));
    CHECK(loo_wrss(bank, y, w, sd, 0.5, wide) != loo_wrss(bank, y, w, sd, 0.5, none));
  }
  CHECK(code_of([&] { select_sigmas(bank.leftCols(1), std::vector<double>{1.0}, std::vector<double>{1.0}); }) ==
        ErrorCode::DegenerateBank);
}

TEST_CASE("leave-out mask") {
  Eigen::MatrixXd d = Eigen::MatrixXd::Ones(4, 4);
  const std::vector<std::int64_t> hours{0, 1, 2, 100};
  mask_leave_out(d, hours, 1);
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(d(0, 0) == inf);
  CHECK(d(1, 0) == inf);
  CHECK(d(2, 0) == 1.0);
  CHECK(d(0, 1) == inf);
  CHECK(d(2, 1) == inf);
  CHECK(d(3, 1) == 1.0);
  CHECK(d(2, 3) == 1.0);
  // epoch 3 has nothing inside its window; all-in-window targets keep plain leave-one-out
  Eigen::MatrixXd e = Eigen::MatrixXd::Ones(2, 2);
  const std::vector<std::int64_t> close{0, 1};
  mask_leave_out(e, close, 5);
  CHECK(e(1, 0) == 1.0);
  CHECK(e(0, 0) == inf);
  CHECK(code_of([&] { mask_leave_out(e, hours, 1); }) == ErrorCode::LengthMismatch);
}

TEST_CASE("analytic gradient matches central differences") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto problem = toy_problem(seed, 3, 2, 3);
    const auto params = WlrParams::random(4, 3, seed + 100);
    const std::vector<double> sigmas{0.9, 1.4};
    const auto obj = wrss_and_gradient(params, problem, sigmas);
    const auto grad = obj.gradient.flatten();
    const auto theta = params.flatten();
    const double eps = 1e-5;
    double worst = 0.0;
    for (std::size_t q = 0; q < theta.size(); ++q) {
      auto up = theta, dn = theta;
      up[q] += eps;
      dn[q] -= eps;
      auto pu = params, pd = params;
      pu.assign(up);
      pd.assign(dn);
      const double fd =
          (wrss_and_gradient(pu, problem, sigmas).wrss - wrss_and_gradient(pd, problem, sigmas).wrss) / (2 * eps);
      // floor scaled by the objective: central differences carry ~1e-16 |f| / eps of rounding noise
      const double err = std::abs(fd - grad[q]) / std::max({std::abs(fd), std::abs(grad[q]), 1e-6 * (1.0 + obj.wrss)});
      worst = std::max(worst, err);
    }
    CAPTURE(seed);
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("training") {
  // one location's first factor drives the target; flat terrain
  const double noise = 0.5;
  auto data = eltd_test::toy_data(
      80, 3, 2, 5, [](const PathFeatureTensor& x, std::size_t t) { return 4.0 * x.at(t, 1, 0); }, noise, 48);
  const std::vector<double> profile(3, 250.0);

  SUBCASE("fit reaches the noise floor") {
    TrainConfig cfg;
    cfg.learning_rate = 0.01;
    cfg.max_iterations = 150;
    const auto res = train(data, profile, cfg);
    const auto pred = res.model.predict_all(data.x);
    CHECK(stats::rmse(data.y, pred) < 1.05 * noise);
    CHECK(res.trace.loss.back() < res.trace.loss.front());
    CHECK(res.model.loo_exclusion_hours() == cfg.loo_exclusion_hours);
  }
  SUBCASE("zero learning rate freezes the parameters") {
    TrainConfig cfg;
    cfg.learning_rate = 0.0;
    cfg.max_iterations = 20;
    const auto res = train(data, profile, cfg);
    CHECK(res.model.params().flatten() == WlrParams::random(cfg.hidden, 2, cfg.seed).flatten());
    for (double l : res.trace.loss) CHECK(l == res.trace.loss.front());
  }
  SUBCASE("epoch order does not matter") {
    TrainConfig cfg;
    cfg.max_iterations = 30;
    const auto a = train(data, profile, cfg);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    std::reverse(order.begin(), order.end());
    auto b = train(data.select(order), profile, cfg);
    const auto pa = a.model.predict_all(data.x), pb = b.model.predict_all(data.x);
    for (std::size_t t = 0; t < pa.size(); ++t) CHECK(std::abs(pa[t] - pb[t]) < 1e-6 * (1.0 + std::abs(pa[t])));
  }
  SUBCASE("a bank column queried with narrow kernels returns its own target") {
    TrainConfig cfg;
    cfg.max_iterations = 5;
    const auto res = train(data, profile, cfg);
    auto narrow = res.model.sigmas();
    for (auto& s : narrow) s *= 0.01;
    const auto& bank = res.model.bank();
    for (Eigen::Index t : {0, 17, 79}) {
      const std::vector<double> q(bank.col(t).data(), bank.col(t).data() + bank.rows());
      CHECK(agrnn_predict(q, bank, res.model.targets(), narrow).value ==
            doctest::Approx(res.model.targets()[static_cast<std::size_t>(t)]).epsilon(1e-9));
    }
  }
  SUBCASE("profile length must match the locations") {
    CHECK(code_of([&] { train(data, std::vector<double>(2, 1.0), TrainConfig{}); }) == ErrorCode::LengthMismatch);
  }
}
