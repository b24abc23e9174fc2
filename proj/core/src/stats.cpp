#include "eltd/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace eltd::stats {

namespace {

constexpr double kBetaTolerance = 1e-12;
constexpr int kBetaMaxIterations = 10000;

/// Continued fraction for I_x(a, b); converges quickly for x < (a + 1) / (a + b + 2).
double beta_continued_fraction(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kBetaMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kBetaTolerance) return h;
  }
  throw Error(ErrorCode::NonFiniteLoss, "incomplete beta continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw Error(ErrorCode::InvalidArgument, "incomplete beta needs a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw Error(ErrorCode::InvalidArgument, "incomplete beta needs x in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double dof) {
  if (!(dof > 0.0)) throw Error(ErrorCode::InvalidArgument, "t distribution needs dof > 0");
  if (std::isinf(t)) return 0.0;
  if (std::isnan(t)) throw Error(ErrorCode::InvalidArgument, "t statistic is NaN");
  return std::clamp(incomplete_beta(dof / 2.0, 0.5, dof / (dof + t * t)), 0.0, 1.0);
}

double f_survival(double f, double dof_num, double dof_den) {
  if (!(dof_num > 0.0) || !(dof_den > 0.0)) throw Error(ErrorCode::InvalidArgument, "F distribution needs dof > 0");
  if (std::isnan(f)) throw Error(ErrorCode::InvalidArgument, "F statistic is NaN");
  if (f <= 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  return std::clamp(incomplete_beta(dof_den / 2.0, dof_num / 2.0, dof_den / (dof_den + dof_num * f)), 0.0, 1.0);
}

double mean(std::span<const double> v) {
  if (v.empty()) throw Error(ErrorCode::Empty, "mean of empty series");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_sd(std::span<const double> v) {
  if (v.size() < 2) throw Error(ErrorCode::Empty, "standard deviation needs at least 2 samples");
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

Correlation pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::LengthMismatch, "pearson series lengths differ");
  if (x.size() < 3) throw Error(ErrorCode::Empty, "pearson needs at least 3 samples");
  const double mx = mean(x), my = mean(y);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw Error(ErrorCode::ConstantSeries, "pearson input series is constant");
  const double r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double dof = static_cast<double>(x.size() - 2);
  double p = 0.0;
  if (std::abs(r) < 1.0) p = student_t_two_sided_p(r * std::sqrt(dof / (1.0 - r * r)), dof);
  return {r, p, x.size()};
}

FactorSet select_factors(std::span<const CorrelationResult> correlations, double r_min, double p_max) {
  std::vector<MetFactor> keep;
  for (const auto& c : correlations) {
    if (c.p <= p_max && std::abs(c.r) >= r_min) keep.push_back(c.factor);
  }
  return FactorSet(std::move(keep));
}

namespace {

void check_pair(std::span<const double> a, std::span<const double> p) {
  if (a.size() != p.size()) throw Error(ErrorCode::LengthMismatch, "actual/predicted lengths differ");
  if (a.empty()) throw Error(ErrorCode::Empty, "no samples to score");
}

}  // namespace

double rmse(std::span<const double> actual, std::span<const double> predicted) {
  check_pair(actual, predicted);
  double ss = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) ss += (actual[i] - predicted[i]) * (actual[i] - predicted[i]);
  return std::sqrt(ss / static_cast<double>(actual.size()));
}

double mae(std::span<const double> actual, std::span<const double> predicted) {
  check_pair(actual, predicted);
  double s = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) s += std::abs(actual[i] - predicted[i]);
  return s / static_cast<double>(actual.size());
}

AnovaResult anova_oneway(std::span<const std::vector<double>> groups) {
  if (groups.size() < 2) throw Error(ErrorCode::InsufficientGroups, "ANOVA needs at least 2 groups");
  std::size_t total = 0;
  double grand = 0.0;
  for (const auto& g : groups) {
    if (g.size() < 2) throw Error(ErrorCode::InsufficientGroups, "every ANOVA group needs at least 2 samples");
    total += g.size();
    for (double v : g) grand += v;
  }
  grand /= static_cast<double>(total);
  std::vector<double> means;
  for (const auto& g : groups) means.push_back(mean(g));
  const bool equal_means = std::all_of(means.begin(), means.end(), [&](double m) { return m == means.front(); });
  double ss_between = 0.0, ss_within = 0.0;
  for (std::size_t k = 0; k < groups.size(); ++k) {
    const double m = means[k];
    if (!equal_means) ss_between += static_cast<double>(groups[k].size()) * (m - grand) * (m - grand);
    for (double v : groups[k]) ss_within += (v - m) * (v - m);
  }
  const std::size_t df_b = groups.size() - 1;
  const std::size_t df_w = total - groups.size();
  const double ms_b = ss_between / static_cast<double>(df_b);
  const double ms_w = ss_within / static_cast<double>(df_w);
  double f;
  if (ms_w > 0.0) {
    f = ms_b / ms_w;
  } else {
    f = ms_b > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  return {f, f_survival(f, static_cast<double>(df_b), static_cast<double>(df_w)), df_b, df_w};
}

}  // namespace eltd::stats
