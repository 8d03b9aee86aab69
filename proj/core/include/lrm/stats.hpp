#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace lrm {

/// Monte Carlo estimate with its standard error.
struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t samples = 0;

    /// |mean - target| <= k standard errors.
    bool within(double target, double k = 3.0) const noexcept {
        return std::abs(mean - target) <= k * std_error;
    }
};

/// Welford accumulator. Adding in a fixed order gives reproducible output.
class RunningStats {
   public:
    void add(double x) noexcept {
        ++n_;
        const double d = x - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (x - mean_);
    }
    std::size_t count() const noexcept { return n_; }
    double mean() const noexcept { return mean_; }
    double variance() const noexcept { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    double std_error() const noexcept {
        return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
    }
    McEstimate estimate() const noexcept { return {mean(), std_error(), n_}; }

   private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

inline McEstimate estimate_mean(std::span<const double> xs) noexcept {
    RunningStats s;
    for (double x : xs) s.add(x);
    return s.estimate();
}

/// Sample covariance of (x, y) with the standard error of the mean of the
/// centred products.
inline McEstimate estimate_covariance(std::span<const double> x, std::span<const double> y) noexcept {
    const std::size_t n = x.size() < y.size() ? x.size() : y.size();
    if (n == 0) return {};
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    RunningStats products;
    for (std::size_t i = 0; i < n; ++i) products.add((x[i] - mx) * (y[i] - my));
    return products.estimate();
}

}  // namespace lrm
