#pragma once

#include <span>
#include <string_view>

namespace caadam {

double mean(std::span<const double> xs);
/// Sample standard deviation (n - 1 denominator). Zero for fewer than two values.
double sample_std(std::span<const double> xs);

/// Regularized incomplete beta I_x(a, b), evaluated with the Lentz continued
/// fraction on whichever of I_x(a, b) or 1 - I_{1-x}(b, a) converges faster.
/// Relative accuracy is about 1e-14 for the parameter ranges used here.
double incomplete_beta(double x, double a, double b);

/// Student-t cumulative distribution function.
double student_t_cdf(double t, double df);

struct TTestResult {
    double t = 0.0;
    double p = 1.0;  // two-sided
    double df = 0.0;
};

/// Welch's unequal-variance two-sample t-test with Welch-Satterthwaite
/// degrees of freedom. Both samples need at least two values (ConfigError
/// otherwise). When both variances are zero the result is t = 0, p = 1 for
/// equal means and t = +/-inf, p = 0 otherwise.
TTestResult welch_t_test(std::span<const double> a, std::span<const double> b);

/// One-sided p-value for the alternative mean(a) < mean(b).
double one_sided_p_less(const TTestResult& r);

/// "***" for p < 0.001, "**" for p < 0.01, "*" for p < 0.05, otherwise "".
std::string_view significance_stars(double p);

}  // namespace caadam
