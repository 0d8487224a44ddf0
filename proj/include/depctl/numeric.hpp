#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace depctl {

/// Neumaier-compensated accumulator.
class CompensatedSum {
public:
    void add(double x) noexcept;
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

double compensated_sum(std::span<const double> xs) noexcept;
double mean(std::span<const double> xs);
/// Unbiased sample variance.
double variance(std::span<const double> xs);
double standard_error_of_mean(std::span<const double> xs);

/// Empirical quantile of an ascending-sorted sample (type-7 interpolation).
double sorted_quantile(std::span<const double> sorted, double p);

struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
};

/// Ordinary least squares y = a + b x.
LineFit fit_line(std::span<const double> x, std::span<const double> y);
/// Weighted least squares y = a + b x; weights must be nonnegative.
LineFit fit_line_weighted(std::span<const double> x, std::span<const double> y,
                          std::span<const double> w);

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_two_sample(std::vector<double> a, std::vector<double> b);
/// Asymptotic two-sample KS critical value at level 1% (c = 1.628).
double ks_critical_1pct(std::size_t n, std::size_t m);
/// One-sample KS statistic against a continuous CDF.
template <class Cdf>
double ks_one_sample(std::vector<double> xs, Cdf&& cdf);
/// Asymptotic one-sample KS critical value at level 1%.
double ks_critical_1pct(std::size_t n);

/// Spearman rank correlation.
double spearman(std::span<const double> a, std::span<const double> b);
double pearson(std::span<const double> a, std::span<const double> b);

/// Student t quantile (two-sided level handled by caller).
double student_t_quantile(double p, double dof);
double normal_quantile(double p);
double normal_cdf(double x);

} // namespace depctl

#include <algorithm>
#include <cmath>

namespace depctl {

template <class Cdf>
double ks_one_sample(std::vector<double> xs, Cdf&& cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max(d, std::max(f - static_cast<double>(i) / n,
                                 static_cast<double>(i + 1) / n - f));
    }
    return d;
}

} // namespace depctl
