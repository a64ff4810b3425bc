#pragma once

#include <optional>
#include <vector>

namespace clarity {

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double regularized_incomplete_beta(double a, double b, double x);

/// Two-sided p-value of Student's t with `dof` degrees of freedom.
double student_t_two_sided_p(double t, int dof);

struct TTestResult {
  double t = 0.0;
  int dof = 0;
  double p_value = 1.0;
  double mean_difference = 0.0;
};

/// Two-sided paired t-test on per-position differences a[i] - b[i].
/// Zero-variance differences degenerate to p = 1 (all zero) or p = 0.
TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b);
TTestResult t_test_from_differences(const std::vector<double>& differences);

struct Aggregate {
  double mean = 0.0;
  /// Sample standard deviation (n - 1); absent for a single value.
  std::optional<double> stddev;
};

Aggregate aggregate_seeds(const std::vector<double>& values);

}  // namespace clarity
