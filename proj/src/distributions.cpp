#include "depctl/distributions.hpp"

#include "depctl/errors.hpp"

#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/random/poisson_distribution.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace depctl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct RiceParams {
    double nu;
    double sigma;
};

RiceParams rice_params(double K, double omega) {
    return {std::sqrt(K * omega / (K + 1.0)), std::sqrt(omega / (2.0 * (K + 1.0)))};
}

double rice_cdf(const RiceParams& r, double x) {
    if (x <= 0.0) return 0.0;
    const boost::math::non_central_chi_squared ncx(2.0, (r.nu * r.nu) / (r.sigma * r.sigma));
    return boost::math::cdf(ncx, (x * x) / (r.sigma * r.sigma));
}

double rice_survival(const RiceParams& r, double x) {
    if (x <= 0.0) return 1.0;
    const boost::math::non_central_chi_squared ncx(2.0, (r.nu * r.nu) / (r.sigma * r.sigma));
    return boost::math::cdf(boost::math::complement(ncx, (x * x) / (r.sigma * r.sigma)));
}

// Bracketing + bisection on a continuous increasing CDF over (lo, inf).
template <class Cdf>
double bisect_quantile(Cdf&& F, double u, double lo, double hi) {
    while (F(hi) < u) {
        lo = hi;
        hi *= 2.0;
        if (!std::isfinite(hi)) return kInf;
    }
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (F(mid) < u) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo <= 1e-15 * hi || hi - lo <= 1e-300) break;
    }
    return 0.5 * (lo + hi);
}

double poisson_cdf(double mean, double k) {
    if (k < 0.0) return 0.0;
    return boost::math::gamma_q(std::floor(k) + 1.0, mean);
}

double poisson_survival(double mean, double k) {
    if (k < 0.0) return 1.0;
    return boost::math::gamma_p(std::floor(k) + 1.0, mean);
}

double sample_poisson(double mean, RandomStream& stream) {
    if (mean < 50.0) {
        // Sequential inversion with the pmf recurrence.
        const double u = stream.uniform();
        double k = 0.0;
        double p = std::exp(-mean);
        double F = p;
        while (u > F && k < 1000.0 + 20.0 * mean) {
            k += 1.0;
            p *= mean / k;
            F += p;
        }
        return k;
    }
    boost::random::poisson_distribution<long, double> dist(mean);
    return static_cast<double>(dist(stream));
}

// Base (unshifted, unscaled) law evaluations.
double base_cdf(const DistributionSpec& s, double x) {
    switch (s.family) {
    case Family::rayleigh:
        return x <= 0.0 ? 0.0 : -std::expm1(-x * x / (2.0 * s.p1 * s.p1));
    case Family::rice:
        return rice_cdf(rice_params(s.p1, s.p2), x);
    case Family::nakagami:
        return x <= 0.0 ? 0.0 : boost::math::gamma_p(s.p1, s.p1 * x * x / s.p2);
    case Family::lognormal:
        return x <= 0.0 ? 0.0
                        : boost::math::cdf(boost::math::normal(s.p1, s.p2), std::log(x));
    case Family::weibull:
        return x <= 0.0 ? 0.0 : -std::expm1(-std::pow(x / s.p2, s.p1));
    case Family::pareto1:
        return x <= s.p2 ? 0.0 : -std::expm1(s.p1 * std::log(s.p2 / x));
    case Family::exponential:
        return x <= 0.0 ? 0.0 : -std::expm1(-s.p1 * x);
    case Family::logpareto: {
        if (x <= std::exp(s.p2)) return 0.0;
        return -std::expm1(s.p1 * std::log(s.p2 / std::log(x)));
    }
    case Family::constant:
        return x < s.p1 ? 0.0 : 1.0;
    case Family::uniform:
        if (x <= s.p1) return 0.0;
        if (x >= s.p2) return 1.0;
        return (x - s.p1) / (s.p2 - s.p1);
    case Family::poisson:
        return poisson_cdf(s.p1, x);
    }
    return 0.0;
}

double base_survival(const DistributionSpec& s, double x) {
    switch (s.family) {
    case Family::rayleigh:
        return x <= 0.0 ? 1.0 : std::exp(-x * x / (2.0 * s.p1 * s.p1));
    case Family::rice:
        return rice_survival(rice_params(s.p1, s.p2), x);
    case Family::nakagami:
        return x <= 0.0 ? 1.0 : boost::math::gamma_q(s.p1, s.p1 * x * x / s.p2);
    case Family::lognormal:
        return x <= 0.0 ? 1.0
                        : boost::math::cdf(boost::math::complement(
                              boost::math::normal(s.p1, s.p2), std::log(x)));
    case Family::weibull:
        return x <= 0.0 ? 1.0 : std::exp(-std::pow(x / s.p2, s.p1));
    case Family::pareto1:
        return x <= s.p2 ? 1.0 : std::pow(s.p2 / x, s.p1);
    case Family::exponential:
        return x <= 0.0 ? 1.0 : std::exp(-s.p1 * x);
    case Family::logpareto:
        if (x <= std::exp(s.p2)) return 1.0;
        return std::pow(s.p2 / std::log(x), s.p1);
    case Family::constant:
        return x < s.p1 ? 1.0 : 0.0;
    case Family::uniform:
        return 1.0 - base_cdf(s, x);
    case Family::poisson:
        return poisson_survival(s.p1, x);
    }
    return 0.0;
}

double base_quantile(const DistributionSpec& s, double u) {
    switch (s.family) {
    case Family::rayleigh:
        return s.p1 * std::sqrt(-2.0 * std::log1p(-u));
    case Family::rice: {
        const RiceParams r = rice_params(s.p1, s.p2);
        return bisect_quantile([&](double x) { return rice_cdf(r, x); }, u, 0.0,
                               r.nu + 4.0 * r.sigma + 1e-300);
    }
    case Family::nakagami:
        return std::sqrt(s.p2 / s.p1 * boost::math::gamma_p_inv(s.p1, u));
    case Family::lognormal:
        return std::exp(boost::math::quantile(boost::math::normal(s.p1, s.p2), u));
    case Family::weibull:
        return s.p2 * std::pow(-std::log1p(-u), 1.0 / s.p1);
    case Family::pareto1:
        return s.p2 * std::pow(1.0 - u, -1.0 / s.p1);
    case Family::exponential:
        return -std::log1p(-u) / s.p1;
    case Family::logpareto:
        return std::exp(s.p2 * std::pow(1.0 - u, -1.0 / s.p1));
    case Family::constant:
        return s.p1;
    case Family::uniform:
        return s.p1 + u * (s.p2 - s.p1);
    case Family::poisson: {
        double k = std::max(0.0, std::floor(s.p1 + boost::math::quantile(
                                                       boost::math::normal(), u) *
                                                       std::sqrt(s.p1)));
        while (k > 0.0 && poisson_cdf(s.p1, k - 1.0) >= u) k -= 1.0;
        while (poisson_cdf(s.p1, k) < u) k += 1.0;
        return k;
    }
    }
    return 0.0;
}

double base_sample(const DistributionSpec& s, RandomStream& st) {
    switch (s.family) {
    case Family::rayleigh:
        return s.p1 * std::sqrt(2.0 * st.exponential());
    case Family::rice: {
        const RiceParams r = rice_params(s.p1, s.p2);
        const double re = r.nu + r.sigma * st.normal();
        const double im = r.sigma * st.normal();
        return std::hypot(re, im);
    }
    case Family::nakagami:
        return std::sqrt(sample_gamma(s.p1, st) * s.p2 / s.p1);
    case Family::lognormal:
        return std::exp(s.p1 + s.p2 * st.normal());
    case Family::weibull:
        return s.p2 * std::pow(st.exponential(), 1.0 / s.p1);
    case Family::pareto1:
        return s.p2 * std::pow(st.uniform(), -1.0 / s.p1);
    case Family::exponential:
        return st.exponential() / s.p1;
    case Family::logpareto:
        return std::exp(s.p2 * std::pow(st.uniform(), -1.0 / s.p1));
    case Family::constant:
        return s.p1;
    case Family::uniform:
        return s.p1 + st.uniform() * (s.p2 - s.p1);
    case Family::poisson:
        return sample_poisson(s.p1, st);
    }
    return 0.0;
}

double base_pdf(const DistributionSpec& s, double x) {
    switch (s.family) {
    case Family::rayleigh:
        return x <= 0.0 ? 0.0 : x / (s.p1 * s.p1) * std::exp(-x * x / (2.0 * s.p1 * s.p1));
    case Family::rice: {
        if (x <= 0.0) return 0.0;
        const RiceParams r = rice_params(s.p1, s.p2);
        const double s2 = r.sigma * r.sigma;
        const double arg = x * r.nu / s2;
        // I0 scaled to avoid overflow: I0(z) e^{-z}.
        const double i0s = boost::math::cyl_bessel_i(0, arg) * std::exp(-arg);
        return x / s2 * std::exp(-(x - r.nu) * (x - r.nu) / (2.0 * s2)) * i0s;
    }
    case Family::nakagami: {
        if (x <= 0.0) return 0.0;
        const double m = s.p1;
        const double om = s.p2;
        return std::exp(std::log(2.0) + m * std::log(m / om) - std::lgamma(m) +
                        (2.0 * m - 1.0) * std::log(x) - m * x * x / om);
    }
    case Family::lognormal: {
        if (x <= 0.0) return 0.0;
        const double z = (std::log(x) - s.p1) / s.p2;
        return std::exp(-0.5 * z * z) / (x * s.p2 * std::sqrt(2.0 * std::numbers::pi));
    }
    case Family::weibull:
        return x <= 0.0 ? 0.0
                        : s.p1 / s.p2 * std::pow(x / s.p2, s.p1 - 1.0) *
                              std::exp(-std::pow(x / s.p2, s.p1));
    case Family::pareto1:
        return x < s.p2 ? 0.0 : s.p1 * std::pow(s.p2, s.p1) * std::pow(x, -s.p1 - 1.0);
    case Family::exponential:
        return x < 0.0 ? 0.0 : s.p1 * std::exp(-s.p1 * x);
    case Family::logpareto: {
        if (x <= std::exp(s.p2)) return 0.0;
        const double y = std::log(x);
        return s.p1 * std::pow(s.p2, s.p1) * std::pow(y, -s.p1 - 1.0) / x;
    }
    case Family::uniform:
        return (x < s.p1 || x > s.p2) ? 0.0 : 1.0 / (s.p2 - s.p1);
    case Family::constant:
    case Family::poisson:
        throw ContractError("pdf: " + family_name(s.family) + " has no density");
    }
    return 0.0;
}

} // namespace

DistributionSpec DistributionSpec::rayleigh(double sigma) { return {Family::rayleigh, sigma, 0.0}; }
DistributionSpec DistributionSpec::rice(double K, double omega) { return {Family::rice, K, omega}; }
DistributionSpec DistributionSpec::nakagami(double m, double omega) {
    return {Family::nakagami, m, omega};
}
DistributionSpec DistributionSpec::lognormal(double mu, double sigma) {
    return {Family::lognormal, mu, sigma};
}
DistributionSpec DistributionSpec::weibull(double k, double lambda) {
    return {Family::weibull, k, lambda};
}
DistributionSpec DistributionSpec::pareto1(double alpha, double xm) {
    return {Family::pareto1, alpha, xm};
}
DistributionSpec DistributionSpec::exponential(double rate) {
    return {Family::exponential, rate, 0.0};
}
DistributionSpec DistributionSpec::logpareto(double alpha, double xm) {
    return {Family::logpareto, alpha, xm};
}
DistributionSpec DistributionSpec::constant(double v) { return {Family::constant, v, 0.0}; }
DistributionSpec DistributionSpec::uniform(double a, double b) { return {Family::uniform, a, b}; }
DistributionSpec DistributionSpec::poisson(double mean) { return {Family::poisson, mean, 0.0}; }

DistributionSpec DistributionSpec::shifted(double by) const {
    DistributionSpec out = *this;
    out.shift += by;
    return out;
}

DistributionSpec DistributionSpec::scaled(double by) const {
    DistributionSpec out = *this;
    out.shift *= by;
    out.scale *= by;
    return out;
}

std::string family_name(Family f) {
    switch (f) {
    case Family::rayleigh: return "rayleigh";
    case Family::rice: return "rice";
    case Family::nakagami: return "nakagami";
    case Family::lognormal: return "lognormal";
    case Family::weibull: return "weibull";
    case Family::pareto1: return "pareto1";
    case Family::exponential: return "exponential";
    case Family::logpareto: return "logpareto";
    case Family::constant: return "constant";
    case Family::uniform: return "uniform";
    case Family::poisson: return "poisson";
    }
    return "unknown";
}

Family family_from_name(const std::string& name) {
    for (Family f : {Family::rayleigh, Family::rice, Family::nakagami, Family::lognormal,
                     Family::weibull, Family::pareto1, Family::exponential, Family::logpareto,
                     Family::constant, Family::uniform, Family::poisson}) {
        if (family_name(f) == name) return f;
    }
    throw SchemaError("family: unknown distribution family '" + name + "'");
}

std::string describe(const DistributionSpec& s) {
    std::ostringstream os;
    os << family_name(s.family) << '(';
    switch (s.family) {
    case Family::rayleigh: os << "sigma=" << s.p1; break;
    case Family::rice: os << "K=" << s.p1 << ", omega=" << s.p2; break;
    case Family::nakagami: os << "m=" << s.p1 << ", omega=" << s.p2; break;
    case Family::lognormal: os << "mu=" << s.p1 << ", sigma=" << s.p2; break;
    case Family::weibull: os << "k=" << s.p1 << ", lambda=" << s.p2; break;
    case Family::pareto1:
    case Family::logpareto: os << "alpha=" << s.p1 << ", xm=" << s.p2; break;
    case Family::exponential: os << "rate=" << s.p1; break;
    case Family::constant: os << "v=" << s.p1; break;
    case Family::uniform: os << "a=" << s.p1 << ", b=" << s.p2; break;
    case Family::poisson: os << "mean=" << s.p1; break;
    }
    os << ')';
    if (s.shift != 0.0 || s.scale != 1.0) os << "*" << s.scale << "+" << s.shift;
    return os.str();
}

void validate(const DistributionSpec& s) {
    auto need = [&](bool ok, const char* what) {
        if (!ok) throw ParameterError(family_name(s.family) + ": " + what);
    };
    need(std::isfinite(s.shift), "shift must be finite");
    need(std::isfinite(s.scale) && s.scale > 0.0, "scale must be positive");
    switch (s.family) {
    case Family::rayleigh: need(s.p1 > 0.0 && std::isfinite(s.p1), "sigma must be positive"); break;
    case Family::rice:
        need(s.p1 >= 0.0 && std::isfinite(s.p1), "K must be nonnegative");
        need(s.p2 > 0.0 && std::isfinite(s.p2), "omega must be positive");
        break;
    case Family::nakagami:
        need(s.p1 >= 0.5 && std::isfinite(s.p1), "m must be at least 0.5");
        need(s.p2 > 0.0 && std::isfinite(s.p2), "omega must be positive");
        break;
    case Family::lognormal:
        need(std::isfinite(s.p1), "mu must be finite");
        need(s.p2 > 0.0 && std::isfinite(s.p2), "sigma must be positive");
        break;
    case Family::weibull:
        need(s.p1 > 0.0 && std::isfinite(s.p1), "k must be positive");
        need(s.p2 > 0.0 && std::isfinite(s.p2), "lambda must be positive");
        break;
    case Family::pareto1:
    case Family::logpareto:
        need(s.p1 > 0.0 && std::isfinite(s.p1), "alpha must be positive");
        need(s.p2 > 0.0 && std::isfinite(s.p2), "xm must be positive");
        break;
    case Family::exponential: need(s.p1 > 0.0 && std::isfinite(s.p1), "rate must be positive"); break;
    case Family::constant: need(std::isfinite(s.p1), "v must be finite"); break;
    case Family::uniform:
        need(std::isfinite(s.p1) && std::isfinite(s.p2) && s.p1 < s.p2, "requires a < b");
        break;
    case Family::poisson: need(s.p1 > 0.0 && std::isfinite(s.p1), "mean must be positive"); break;
    }
}

std::string to_string(TailClassLabel::Kind kind) {
    switch (kind) {
    case TailClassLabel::Kind::light: return "light";
    case TailClassLabel::Kind::heavy_all_moments: return "heavy_subexponential_all_moments";
    case TailClassLabel::Kind::regularly_varying: return "regularly_varying";
    case TailClassLabel::Kind::slowly_varying: return "slowly_varying";
    }
    return "unknown";
}

TailClassLabel ground_truth_tail(const DistributionSpec& s) {
    validate(s);
    using K = TailClassLabel::Kind;
    switch (s.family) {
    case Family::lognormal: return {K::heavy_all_moments, 0.0};
    case Family::weibull: return s.p1 < 1.0 ? TailClassLabel{K::heavy_all_moments, 0.0}
                                            : TailClassLabel{K::light, 0.0};
    case Family::pareto1: return {K::regularly_varying, s.p1};
    case Family::logpareto: return {K::slowly_varying, 0.0};
    default: return {K::light, 0.0};
    }
}

double sample_gamma(double shape, RandomStream& st) {
    if (shape < 1.0) {
        const double g = sample_gamma(shape + 1.0, st);
        return g * std::pow(st.uniform(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        const double x = st.normal();
        double v = 1.0 + c * x;
        if (v <= 0.0) continue;
        v = v * v * v;
        const double u = st.uniform();
        if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
    }
}

double sample_one(const DistributionSpec& spec, RandomStream& stream) {
    return spec.shift + spec.scale * base_sample(spec, stream);
}

std::vector<double> sample(const DistributionSpec& spec, RandomStream& stream, std::size_t n) {
    validate(spec);
    if (n < 1) throw ContractError("sample: n must be at least 1");
    std::vector<double> out(n);
    for (auto& x : out) x = sample_one(spec, stream);
    return out;
}

double cdf(const DistributionSpec& spec, double x) {
    validate(spec);
    return base_cdf(spec, (x - spec.shift) / spec.scale);
}

double survival(const DistributionSpec& spec, double x) {
    validate(spec);
    return base_survival(spec, (x - spec.shift) / spec.scale);
}

double quantile(const DistributionSpec& spec, double u) {
    validate(spec);
    if (!(u > 0.0 && u < 1.0)) throw DomainError("quantile: probability must lie in (0,1)");
    return spec.shift + spec.scale * base_quantile(spec, u);
}

double pdf(const DistributionSpec& spec, double x) {
    validate(spec);
    return base_pdf(spec, (x - spec.shift) / spec.scale) / spec.scale;
}

std::optional<double> analytic_mean(const DistributionSpec& s) {
    validate(s);
    double m = 0.0;
    switch (s.family) {
    case Family::rayleigh: m = s.p1 * std::sqrt(std::numbers::pi / 2.0); break;
    case Family::rice: {
        const RiceParams r = rice_params(s.p1, s.p2);
        const double a = r.nu * r.nu / (2.0 * r.sigma * r.sigma);
        // Laguerre L_{1/2}(-a) with exponentially scaled Bessel functions.
        const double h = a / 2.0;
        const double lag = (1.0 + a) * boost::math::cyl_bessel_i(0, h) * std::exp(-h) +
                           a * boost::math::cyl_bessel_i(1, h) * std::exp(-h);
        m = r.sigma * std::sqrt(std::numbers::pi / 2.0) * lag;
        break;
    }
    case Family::nakagami:
        m = std::exp(std::lgamma(s.p1 + 0.5) - std::lgamma(s.p1)) * std::sqrt(s.p2 / s.p1);
        break;
    case Family::lognormal: m = std::exp(s.p1 + 0.5 * s.p2 * s.p2); break;
    case Family::weibull: m = s.p2 * std::tgamma(1.0 + 1.0 / s.p1); break;
    case Family::pareto1:
        if (s.p1 <= 1.0) return std::nullopt;
        m = s.p1 * s.p2 / (s.p1 - 1.0);
        break;
    case Family::exponential: m = 1.0 / s.p1; break;
    case Family::logpareto: return std::nullopt;
    case Family::constant: m = s.p1; break;
    case Family::uniform: m = 0.5 * (s.p1 + s.p2); break;
    case Family::poisson: m = s.p1; break;
    }
    return s.shift + s.scale * m;
}

std::optional<double> analytic_variance(const DistributionSpec& s) {
    validate(s);
    double v = 0.0;
    switch (s.family) {
    case Family::rayleigh: v = (4.0 - std::numbers::pi) / 2.0 * s.p1 * s.p1; break;
    case Family::rice:
    case Family::nakagami: {
        DistributionSpec base = s;
        base.shift = 0.0;
        base.scale = 1.0;
        const double m = *analytic_mean(base);
        v = s.p2 - m * m;
        break;
    }
    case Family::lognormal:
        v = std::expm1(s.p2 * s.p2) * std::exp(2.0 * s.p1 + s.p2 * s.p2);
        break;
    case Family::weibull: {
        const double g1 = std::tgamma(1.0 + 1.0 / s.p1);
        v = s.p2 * s.p2 * (std::tgamma(1.0 + 2.0 / s.p1) - g1 * g1);
        break;
    }
    case Family::pareto1:
        if (s.p1 <= 2.0) return std::nullopt;
        v = s.p1 * s.p2 * s.p2 / ((s.p1 - 1.0) * (s.p1 - 1.0) * (s.p1 - 2.0));
        break;
    case Family::exponential: v = 1.0 / (s.p1 * s.p1); break;
    case Family::logpareto: return std::nullopt;
    case Family::constant: v = 0.0; break;
    case Family::uniform: v = (s.p2 - s.p1) * (s.p2 - s.p1) / 12.0; break;
    case Family::poisson: v = s.p1; break;
    }
    return s.scale * s.scale * v;
}

} // namespace depctl
