#pragma once

#include <span>
#include <vector>

#include "eltd/core_types.hpp"

namespace eltd::stats {

/// Regularized incomplete beta I_x(a, b), continued fraction evaluated by modified Lentz.
double incomplete_beta(double a, double b, double x);

/// Two-sided p-value of Student's t with `dof` degrees of freedom.
double student_t_two_sided_p(double t, double dof);

/// Upper-tail probability P(F > f) of the F distribution.
double f_survival(double f, double dof_num, double dof_den);

struct Correlation {
  double r;
  double p;
  std::size_t n_samples;
};

struct CorrelationResult {
  MetFactor factor;
  double r;
  double p;
  std::size_t n_samples;
};

/// Pearson product-moment correlation with a two-sided t-test p-value.
/// Throws LengthMismatch, ConstantSeries, or Empty (fewer than 3 samples).
Correlation pearson(std::span<const double> x, std::span<const double> y);

inline constexpr double kDefaultMinAbsR = 0.5;
inline constexpr double kDefaultMaxP = 0.05;

/// Keeps factors with p <= p_max and |r| >= r_min (both inclusive), in canonical order.
FactorSet select_factors(std::span<const CorrelationResult> correlations, double r_min = kDefaultMinAbsR,
                         double p_max = kDefaultMaxP);

double rmse(std::span<const double> actual, std::span<const double> predicted);
double mae(std::span<const double> actual, std::span<const double> predicted);

struct AnovaResult {
  double f;
  double p;
  std::size_t df_between;
  std::size_t df_within;
};

/// One-way ANOVA. Throws InsufficientGroups unless there are >= 2 groups of >= 2 samples.
AnovaResult anova_oneway(std::span<const std::vector<double>> groups);

double mean(std::span<const double> v);
/// Sample (n-1) standard deviation.
double sample_sd(std::span<const double> v);

}  // namespace eltd::stats
