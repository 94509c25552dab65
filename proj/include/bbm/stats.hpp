#ifndef BBM_STATS_HPP
#define BBM_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "errors.hpp"
#include "vec2.hpp"

namespace bbm::stats
{

/// Streaming mean/variance/kurtosis (Welford / Terriberry update).
class Moments
{
public:
    void add(double x) noexcept
    {
        const double n1 = static_cast<double>(n_);
        ++n_;
        const double n = static_cast<double>(n_);
        const double delta = x - mean_;
        const double delta_n = delta / n;
        const double delta_n2 = delta_n * delta_n;
        const double term1 = delta * delta_n * n1;
        mean_ += delta_n;
        m4_ += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * m2_ -
               4.0 * delta_n * m3_;
        m3_ += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * m2_;
        m2_ += term1;
    }

    std::size_t count() const noexcept { return n_; }
    double mean() const noexcept { return mean_; }
    /// Unbiased sample variance.
    double variance() const noexcept { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    double stddev() const noexcept { return std::sqrt(variance()); }
    double stderr_mean() const noexcept
    {
        return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
    }
    /// Excess kurtosis, m4 / m2^2 - 3 with population moments.
    double excess_kurtosis() const noexcept
    {
        if (n_ < 2 || m2_ == 0.0)
            return 0.0;
        const double n = static_cast<double>(n_);
        return n * m4_ / (m2_ * m2_) - 3.0;
    }

private:
    std::size_t n_ = 0;
    double mean_ = 0.0, m2_ = 0.0, m3_ = 0.0, m4_ = 0.0;
};

struct Estimate
{
    double mean = 0.0;
    double stderr = 0.0;
};

/// Batch-means estimate of a time average and its standard error.
inline Estimate batch_means(std::span<const double> xs, std::size_t n_batches = 32)
{
    if (xs.empty())
        throw ArgumentError("batch_means on an empty series");
    n_batches = std::min(n_batches, xs.size());
    const std::size_t per = xs.size() / n_batches;
    Moments batch;
    for (std::size_t b = 0; b < n_batches; ++b) {
        double s = 0.0;
        for (std::size_t i = b * per; i < (b + 1) * per; ++i)
            s += xs[i];
        batch.add(s / static_cast<double>(per));
    }
    return {batch.mean(), batch.stderr_mean()};
}

/// Sample covariance of 2-vectors together with the standard error of each
/// entry, SE(c_ij) = sd((x_i - m_i)(x_j - m_j)) / sqrt(n).
struct Cov2
{
    Vec2 mean;
    Vec2 se_mean;
    Mat2 cov;
    Mat2 se;
    Vec2 kurtosis;
    std::size_t n = 0;
};

inline Cov2 covariance(std::span<const Vec2> xs)
{
    Cov2 out;
    out.n = xs.size();
    if (xs.size() < 2)
        return out;
    const double n = static_cast<double>(xs.size());
    Moments mx, my;
    for (const auto& p : xs) {
        mx.add(p.x);
        my.add(p.y);
    }
    out.mean = {mx.mean(), my.mean()};
    out.se_mean = {mx.stderr_mean(), my.stderr_mean()};
    out.kurtosis = {mx.excess_kurtosis(), my.excess_kurtosis()};
    Moments pxx, pxy, pyy;
    for (const auto& p : xs) {
        const double dx = p.x - out.mean.x, dy = p.y - out.mean.y;
        pxx.add(dx * dx);
        pxy.add(dx * dy);
        pyy.add(dy * dy);
    }
    const double bessel = n / (n - 1.0);
    out.cov = {pxx.mean() * bessel, pxy.mean() * bessel, pxy.mean() * bessel, pyy.mean() * bessel};
    out.se = {pxx.stderr_mean(), pxy.stderr_mean(), pxy.stderr_mean(), pyy.stderr_mean()};
    return out;
}

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
inline double ks_statistic(std::vector<double> a, std::vector<double> b)
{
    if (a.empty() || b.empty())
        throw ArgumentError("KS test needs non-empty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x)
            ++i;
        while (j < b.size() && b[j] <= x)
            ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

/// Kolmogorov distribution tail P(K > lambda) = 2 sum (-1)^(k-1) exp(-2 k^2 lambda^2).
inline double kolmogorov_tail(double lambda)
{
    if (lambda <= 0.0)
        return 1.0;
    if (lambda < 0.2)
        return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 ? 1.0 : -1.0) * term;
        if (term < 1e-17)
            break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

inline double ks_effective_n(std::size_t n, std::size_t m)
{
    return static_cast<double>(n) * static_cast<double>(m) / static_cast<double>(n + m);
}

/// Asymptotic p-value with the Stephens small-sample correction.
inline double ks_pvalue(double d, std::size_t n, std::size_t m)
{
    const double en = std::sqrt(ks_effective_n(n, m));
    return kolmogorov_tail((en + 0.12 + 0.11 / en) * d);
}

/// Asymptotic critical value c(alpha) sqrt((n+m)/(n m)); c(0.01) = 1.6276.
inline double ks_critical(double alpha, std::size_t n, std::size_t m)
{
    const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
    return c / std::sqrt(ks_effective_n(n, m));
}

inline double normal_quantile(double p)
{
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

/// Two-sided critical z for significance alpha.
inline double z_critical(double alpha) { return normal_quantile(1.0 - alpha / 2.0); }

/// Pooled two-proportion z statistic; 0 when both proportions are 0 or 1.
inline double two_proportion_z(std::size_t k1, std::size_t n1, std::size_t k2, std::size_t n2)
{
    const double p1 = static_cast<double>(k1) / static_cast<double>(n1);
    const double p2 = static_cast<double>(k2) / static_cast<double>(n2);
    const double pool = static_cast<double>(k1 + k2) / static_cast<double>(n1 + n2);
    const double se =
        std::sqrt(pool * (1.0 - pool) * (1.0 / static_cast<double>(n1) + 1.0 / static_cast<double>(n2)));
    if (se == 0.0)
        return 0.0;
    return (p1 - p2) / se;
}

struct LinearFit
{
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
};

/// Ordinary least squares y = a + b x.
inline LinearFit linear_fit(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 3)
        throw ArgumentError("linear_fit needs at least three paired points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - f.intercept - f.slope * x[i];
        rss += e * e;
    }
    f.slope_se = std::sqrt(rss / (n - 2.0) / sxx);
    return f;
}

} // namespace bbm::stats

#endif // BBM_STATS_HPP
