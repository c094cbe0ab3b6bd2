#include "cms/numeric.hpp"

#include "cms/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace cms {

double log_add(double a, double b)
{
    if (a == kNegInf)
        return b;
    if (b == kNegInf)
        return a;
    if (a == kInf || b == kInf)
        return kInf;
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

void LogSumAccumulator::add(double log_term)
{
    if (std::isnan(log_term))
        throw DomainError("NaN term in log-space sum");
    if (log_term == kNegInf)
        return;
    if (log_term == kInf) {
        max_ = kInf;
        return;
    }
    if (max_ == kInf)
        return;
    if (log_term > max_) {
        const double scale = max_ == kNegInf ? 0.0 : std::exp(max_ - log_term);
        sum_ *= scale;
        comp_ *= scale;
        max_ = log_term;
    }
    const double x = std::exp(log_term - max_);
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
        comp_ += (sum_ - t) + x;
    else
        comp_ += (x - t) + sum_;
    sum_ = t;
}

double LogSumAccumulator::value() const
{
    if (max_ == kNegInf || max_ == kInf)
        return max_;
    return max_ + std::log(sum_ + comp_);
}

double log_sum(std::span<const double> log_terms)
{
    LogSumAccumulator acc;
    for (double t : log_terms)
        acc.add(t);
    return acc.value();
}

namespace {

// Least squares by modified Gram-Schmidt for up to three columns. Returns the
// coefficients and the (X^T X)^{-1}_{00} entry for the stderr of the first one.
template <std::size_t K>
struct LstsqResult {
    std::array<double, K> coef{};
    double inv00 = 0.0;
    double ssr = 0.0;
    double max_residual = 0.0;
    bool ok = false;
};

template <std::size_t K>
LstsqResult<K> lstsq(const std::vector<std::array<double, K>>& rows, const std::vector<double>& y)
{
    const std::size_t m = rows.size();
    LstsqResult<K> out;
    if (m < K)
        return out;
    std::array<std::vector<double>, K> q;
    std::array<std::array<double, K>, K> r{};
    for (std::size_t j = 0; j < K; ++j) {
        q[j].resize(m);
        for (std::size_t i = 0; i < m; ++i)
            q[j][i] = rows[i][j];
    }
    for (std::size_t j = 0; j < K; ++j) {
        for (std::size_t p = 0; p < j; ++p) {
            double d = 0.0;
            for (std::size_t i = 0; i < m; ++i)
                d += q[p][i] * q[j][i];
            r[p][j] = d;
            for (std::size_t i = 0; i < m; ++i)
                q[j][i] -= d * q[p][i];
        }
        double norm = 0.0;
        for (double v : q[j])
            norm += v * v;
        norm = std::sqrt(norm);
        if (norm < 1e-12)
            return out;
        r[j][j] = norm;
        for (double& v : q[j])
            v /= norm;
    }
    std::array<double, K> qty{};
    for (std::size_t j = 0; j < K; ++j)
        for (std::size_t i = 0; i < m; ++i)
            qty[j] += q[j][i] * y[i];
    for (std::size_t jj = K; jj-- > 0;) {
        double v = qty[jj];
        for (std::size_t p = jj + 1; p < K; ++p)
            v -= r[jj][p] * out.coef[p];
        out.coef[jj] = v / r[jj][jj];
    }
    // Row 0 of R^{-1}.
    std::array<double, K> rinv0{};
    for (std::size_t j = 0; j < K; ++j) {
        double v = j == 0 ? 1.0 : 0.0;
        for (std::size_t p = 0; p < j; ++p)
            v -= rinv0[p] * r[p][j];
        rinv0[j] = v / r[j][j];
    }
    for (double v : rinv0)
        out.inv00 += v * v;
    for (std::size_t i = 0; i < m; ++i) {
        double pred = 0.0;
        for (std::size_t j = 0; j < K; ++j)
            pred += out.coef[j] * rows[i][j];
        const double res = y[i] - pred;
        out.ssr += res * res;
        out.max_residual = std::max(out.max_residual, std::abs(res));
    }
    out.ok = true;
    return out;
}

} // namespace

LineFit fit_line(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size())
        throw DomainError("fit_line: size mismatch");
    std::vector<std::array<double, 2>> rows;
    std::vector<double> ys;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(y[i]))
            continue;
        rows.push_back({x[i], 1.0});
        ys.push_back(y[i]);
    }
    LineFit fit;
    fit.points = rows.size();
    if (rows.size() == 1) {
        fit.intercept = ys[0];
        return fit;
    }
    const auto r = lstsq<2>(rows, ys);
    if (!r.ok)
        return fit;
    fit.slope = r.coef[0];
    fit.intercept = r.coef[1];
    fit.max_residual = r.max_residual;
    if (rows.size() > 2)
        fit.slope_stderr = std::sqrt(r.ssr / static_cast<double>(rows.size() - 2) * r.inv00);
    return fit;
}

GrowthFit fit_growth(std::span<const double> log_terms, std::size_t first_n, std::size_t last_n)
{
    std::vector<std::array<double, 3>> rows;
    std::vector<double> ys;
    first_n = std::max<std::size_t>(first_n, 1);
    last_n = std::min(last_n, log_terms.size());
    for (std::size_t n = first_n; n <= last_n; ++n) {
        const double v = log_terms[n - 1];
        if (!std::isfinite(v))
            continue;
        rows.push_back({static_cast<double>(n), std::log(static_cast<double>(n)), 1.0});
        ys.push_back(v);
    }
    GrowthFit fit;
    fit.points = rows.size();
    if (rows.size() < 3) {
        std::vector<double> xs;
        for (const auto& row : rows)
            xs.push_back(row[0]);
        const LineFit line = fit_line(xs, ys);
        fit.rate = line.slope;
        fit.intercept = line.intercept;
        return fit;
    }
    const auto r = lstsq<3>(rows, ys);
    if (!r.ok)
        return fit;
    fit.rate = r.coef[0];
    fit.exponent = r.coef[1];
    fit.intercept = r.coef[2];
    fit.max_residual = r.max_residual;
    if (rows.size() > 3)
        fit.rate_stderr = std::sqrt(r.ssr / static_cast<double>(rows.size() - 3) * r.inv00);
    return fit;
}

} // namespace cms
