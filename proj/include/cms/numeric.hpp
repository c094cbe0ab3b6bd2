#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace cms {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// log(e^a + e^b) with -inf as the additive identity.
double log_add(double a, double b);

/// Accumulates sum_i e^{x_i} in log space. Terms are rescaled to the running
/// maximum and summed with Neumaier compensation.
class LogSumAccumulator {
public:
    void add(double log_term);
    [[nodiscard]] double value() const;
    [[nodiscard]] bool empty() const noexcept { return max_ == kNegInf; }

private:
    double max_ = kNegInf;
    double sum_ = 0.0;
    double comp_ = 0.0;
};

double log_sum(std::span<const double> log_terms);

/// Least-squares fit y = slope * x + intercept.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double max_residual = 0.0;
    std::size_t points = 0;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Least-squares fit of log t_n = rate * n + exponent * log n + intercept.
/// The log n regressor absorbs polynomial prefactors, so `rate` estimates
/// lim (1/n) log t_n without the O(log n / n) bias of a plain line fit.
struct GrowthFit {
    double rate = 0.0;
    double exponent = 0.0;
    double intercept = 0.0;
    double rate_stderr = 0.0;
    double max_residual = 0.0;
    std::size_t points = 0;
};

/// `log_terms[k]` holds log t_{k+1}. Uses n in [first_n, last_n], skipping -inf.
GrowthFit fit_growth(std::span<const double> log_terms, std::size_t first_n, std::size_t last_n);

/// A value with a certified absolute error bound.
struct CertifiedValue {
    double value = 0.0;
    double error_bound = 0.0;
};

} // namespace cms
