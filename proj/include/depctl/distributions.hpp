#pragma once

#include "depctl/random_stream.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace depctl {

enum class Family {
    rayleigh,     // sigma
    rice,         // K, omega
    nakagami,     // m, omega
    lognormal,    // mu, sigma
    weibull,      // k, lambda
    pareto1,      // alpha, xm
    exponential,  // rate
    logpareto,    // alpha, xm; X = exp(ParetoI(alpha, xm))
    constant,     // v
    uniform,      // a, b
    poisson,      // mean
};

/// Parametric marginal law. `p1`/`p2` hold the family parameters in the
/// order listed in `Family`; `shift` and `scale` apply X -> shift + scale*X
/// on top of the base law.
struct DistributionSpec {
    Family family = Family::constant;
    double p1 = 0.0;
    double p2 = 0.0;
    double shift = 0.0;
    double scale = 1.0;

    static DistributionSpec rayleigh(double sigma);
    static DistributionSpec rice(double K, double omega);
    static DistributionSpec nakagami(double m, double omega);
    static DistributionSpec lognormal(double mu, double sigma);
    static DistributionSpec weibull(double k, double lambda);
    static DistributionSpec pareto1(double alpha, double xm);
    static DistributionSpec exponential(double rate);
    static DistributionSpec logpareto(double alpha, double xm);
    static DistributionSpec constant(double v);
    static DistributionSpec uniform(double a, double b);
    static DistributionSpec poisson(double mean);

    DistributionSpec shifted(double by) const;
    DistributionSpec scaled(double by) const;

    bool operator==(const DistributionSpec&) const = default;
};

std::string family_name(Family f);
Family family_from_name(const std::string& name);
/// Short human-readable form, e.g. "pareto1(alpha=2, xm=1)".
std::string describe(const DistributionSpec& spec);

/// Throws ParameterError when a parameter is outside its domain.
void validate(const DistributionSpec& spec);

struct TailClassLabel {
    enum class Kind { light, heavy_all_moments, regularly_varying, slowly_varying };
    Kind kind = Kind::light;
    /// Regular-variation index; only meaningful for regularly_varying.
    double index = 0.0;

    bool operator==(const TailClassLabel&) const = default;
};

std::string to_string(TailClassLabel::Kind kind);
TailClassLabel ground_truth_tail(const DistributionSpec& spec);

double sample_one(const DistributionSpec& spec, RandomStream& stream);
std::vector<double> sample(const DistributionSpec& spec, RandomStream& stream, std::size_t n);

double cdf(const DistributionSpec& spec, double x);
/// P(X > x), computed without cancellation where the family allows.
double survival(const DistributionSpec& spec, double x);
/// inf{x : F(x) >= u} for u in (0, 1).
double quantile(const DistributionSpec& spec, double u);
/// Density (continuous families only).
double pdf(const DistributionSpec& spec, double x);

/// Analytic mean; empty when infinite.
std::optional<double> analytic_mean(const DistributionSpec& spec);
/// Analytic variance; empty when infinite.
std::optional<double> analytic_variance(const DistributionSpec& spec);

/// Standard gamma(shape, 1) draw (Marsaglia-Tsang).
double sample_gamma(double shape, RandomStream& stream);

} // namespace depctl
