#include "depctl/tail_lab.hpp"

#include "depctl/dependence.hpp"
#include "depctl/errors.hpp"
#include "depctl/numeric.hpp"

#include <boost/random/binomial_distribution.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace depctl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// log(mean(exp(v))) over the selected values; -inf when none selected.
template <class Pred>
double log_mean_exp(std::span<const double> v, Pred&& take, double* share = nullptr) {
    double m = -kInf;
    std::size_t count = 0;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (take(i)) {
            m = std::max(m, v[i]);
            ++count;
        }
    if (count == 0 || m == -kInf) {
        if (share) *share = 0.0;
        return -kInf;
    }
    CompensatedSum s;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (take(i)) s.add(std::exp(v[i] - m));
    if (share) *share = 1.0 / s.value();
    return m + std::log(s.value()) - std::log(static_cast<double>(count));
}

std::vector<std::size_t> geometric_counts(std::size_t lo, std::size_t hi, std::size_t points) {
    std::vector<std::size_t> ks;
    const double a = std::log(static_cast<double>(lo));
    const double b = std::log(static_cast<double>(hi));
    for (std::size_t i = 0; i < points; ++i) {
        const double t = points == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(points - 1);
        const auto k = static_cast<std::size_t>(std::llround(std::exp(a + t * (b - a))));
        if (ks.empty() || k != ks.back()) ks.push_back(k);
    }
    return ks;
}

double percentile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    return sorted_quantile(v, p);
}

struct TopHalf {
    std::size_t begin;
    std::size_t end;
};

TopHalf top_half(std::size_t g) { return {g / 2, g}; }

double top_mean(const std::vector<double>& ratio, const std::vector<double>& counts, TopHalf h) {
    CompensatedSum num, den;
    for (std::size_t i = h.begin; i < h.end; ++i) {
        num.add(counts[i] * ratio[i]);
        den.add(counts[i]);
    }
    return den.value() > 0.0 ? num.value() / den.value() : 0.0;
}

// Count-weighted least-squares slope of log ratio on log x; NaN when a
// count in the window is zero.
double top_slope(const std::vector<double>& grid, const std::vector<double>& ratio,
                 const std::vector<double>& counts, TopHalf h) {
    std::vector<double> lx, lr, w;
    for (std::size_t i = h.begin; i < h.end; ++i) {
        if (!(counts[i] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
        lx.push_back(std::log(grid[i]));
        lr.push_back(std::log(ratio[i]));
        w.push_back(counts[i]);
    }
    return fit_line_weighted(lx, lr, w).slope;
}

} // namespace

EmpiricalTail::EmpiricalTail(std::vector<double> samples) : sorted_(std::move(samples)) {
    for (double x : sorted_)
        if (std::isnan(x)) throw ContractError("EmpiricalTail: NaN sample");
    std::sort(sorted_.begin(), sorted_.end());
}

std::size_t EmpiricalTail::exceedances(double x) const {
    return static_cast<std::size_t>(sorted_.end() -
                                    std::upper_bound(sorted_.begin(), sorted_.end(), x));
}

std::size_t EmpiricalTail::below(double x) const {
    return static_cast<std::size_t>(std::lower_bound(sorted_.begin(), sorted_.end(), x) -
                                    sorted_.begin());
}

double EmpiricalTail::survival(double x) const {
    if (sorted_.empty()) throw ContractError("EmpiricalTail: empty sample");
    return static_cast<double>(exceedances(x)) / static_cast<double>(n());
}

std::size_t EmpiricalTail::infinite_count() const {
    return static_cast<std::size_t>(
        std::count_if(sorted_.rbegin(), sorted_.rend(), [](double x) { return std::isinf(x); }));
}

double hill(const EmpiricalTail& tail, std::size_t k) {
    const std::size_t n = tail.n();
    if (k < 10 || 2 * k >= n) throw ContractError("hill: requires 10 <= k < n/2");
    const auto& s = tail.sorted();
    const double ref = s[n - k - 1];
    if (!(ref > 0.0)) throw DomainError("hill: nonpositive order statistic in the top-k window");
    CompensatedSum acc;
    for (std::size_t i = n - k; i < n; ++i) acc.add(std::log(s[i] / ref));
    if (acc.value() == 0.0) throw DomainError("hill: zero log spacings");
    return static_cast<double>(k) / acc.value();
}

std::vector<double> default_theta_grid() {
    std::vector<double> g;
    for (int e = -10; e <= 3; ++e) g.push_back(std::ldexp(1.0, e));
    return g;
}

MomentCheck check_log_expectation(std::span<const double> lv, HalfSplit split) {
    const std::size_t n = lv.size();
    if (n < 2) throw ContractError("check_log_expectation: need at least two values");
    MomentCheck mc;
    for (double v : lv)
        if (std::isnan(v) || v == kInf) {
            mc.finite = false;
            mc.log_estimate = kInf;
            mc.growth = kInf;
            mc.max_share = 1.0;
            mc.hill_index = 0.0;
            return mc;
        }

    mc.log_estimate = log_mean_exp(lv, [](std::size_t) { return true; }, &mc.max_share);
    const std::size_t half = n / 2;
    const double log_half =
        split == HalfSplit::leading
            ? log_mean_exp(lv, [&](std::size_t i) { return i < half; })
            : log_mean_exp(lv, [](std::size_t i) { return (mix64(i) & 1u) == 0u; });
    if (mc.log_estimate == -kInf && log_half == -kInf) {
        mc.growth = 0.0;
    } else if (log_half == -kInf) {
        mc.growth = kInf;
    } else {
        mc.growth = std::abs(std::expm1(mc.log_estimate - log_half));
    }

    const std::size_t k = std::clamp<std::size_t>(n / 100, 10, 1000);
    mc.hill_index = kInf;
    if (2 * k < n) {
        std::vector<double> top(lv.begin(), lv.end());
        std::nth_element(top.begin(), top.begin() + static_cast<std::ptrdiff_t>(n - k - 1), top.end());
        const double ref = top[n - k - 1];
        if (std::isfinite(ref)) {
            CompensatedSum acc;
            for (std::size_t i = n - k; i < n; ++i) acc.add(top[i] - ref);
            if (acc.value() > 0.0) mc.hill_index = static_cast<double>(k) / acc.value();
        }
    }
    mc.finite = mc.growth <= 0.25 && mc.max_share <= 0.25 && mc.hill_index > 1.1;
    return mc;
}

MomentProbe mgf_probe(const EmpiricalTail& tail, const std::vector<double>& grid) {
    if (grid.empty()) throw ContractError("mgf_probe: empty theta grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0)) throw ContractError("mgf_probe: theta grid must be positive");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw ContractError("mgf_probe: theta grid must be strictly increasing");
    }
    MomentProbe mp;
    mp.theta_grid = grid;
    const auto& xs = tail.sorted();
    const std::size_t n = xs.size();
    const std::size_t k1 = std::clamp<std::size_t>(n / 1000, 50, 1000);
    bool growing = false;
    if (20 * k1 <= n && std::isfinite(xs.back())) {
        auto mean_excess = [&](std::size_t k) {
            CompensatedSum acc;
            for (std::size_t i = n - k; i < n; ++i) acc.add(xs[i] - xs[n - k - 1]);
            return acc.value() / static_cast<double>(k);
        };
        const double top = mean_excess(k1);
        const double wide = mean_excess(10 * k1);
        if (wide > 0.0) {
            mp.mean_excess_ratio = top / wide;
            growing = mp.mean_excess_ratio > 1.5;
        }
    }
    std::vector<double> lv(n);
    for (double theta : grid) {
        for (std::size_t i = 0; i < lv.size(); ++i) lv[i] = theta * tail.sorted()[i];
        const MomentCheck mc = check_log_expectation(lv, HalfSplit::hashed);
        mp.checks.push_back(mc);
        mp.estimates.push_back(std::exp(mc.log_estimate));
        mp.stable.push_back(mc.finite && !growing);
    }
    return mp;
}

std::string to_string(TailVerdict v) {
    switch (v) {
    case TailVerdict::light: return "light";
    case TailVerdict::heavy: return "heavy";
    case TailVerdict::inconclusive: return "inconclusive";
    }
    return "unknown";
}

LightTailResult light_tail_test(const EmpiricalTail& tail) {
    const std::size_t n = tail.n();
    if (n < 10000) throw ContractError("light_tail_test: requires at least 1e4 samples");
    LightTailResult r;
    const std::size_t n_inf = tail.infinite_count();
    const std::size_t k_max = n / 10;
    r.points = k_max > n_inf ? k_max - n_inf : 0;
    if (r.points < 100) {
        r.reason = "fewer than 100 finite points in the top decade";
        return r;
    }
    const std::size_t k_min = std::max<std::size_t>(20, n_inf + 20);
    const auto ks = geometric_counts(k_max, k_min, 24);  // x ascending
    const auto& s = tail.sorted();
    std::vector<double> x, lx, y;
    bool positive = true;
    for (std::size_t k : ks) {
        const double xv = s[n - k];
        x.push_back(xv);
        y.push_back(std::log(static_cast<double>(k) / static_cast<double>(n)));
        positive = positive && xv > 0.0;
        lx.push_back(xv > 0.0 ? std::log(xv) : 0.0);
    }
    const std::size_t mid = x.size() / 2;
    auto fit = [&](const std::vector<double>& ax, std::size_t b, std::size_t e) {
        return fit_line(std::span<const double>(ax).subspan(b, e - b),
                        std::span<const double>(y).subspan(b, e - b))
            .slope;
    };
    try {
        r.semilog_slope_lower = fit(x, 0, mid + 1);
        r.semilog_slope_upper = fit(x, mid, x.size());
        if (positive) {
            r.loglog_slope_lower = fit(lx, 0, mid + 1);
            r.loglog_slope_upper = fit(lx, mid, x.size());
        }
    } catch (const ContractError&) {
        r.reason = "degenerate top decade (tied order statistics)";
        return r;
    }

    constexpr double kTol = 1.3;
    const double ll = r.loglog_slope_lower;
    const double lu = r.loglog_slope_upper;
    if (positive && ll < 0.0 && lu < 0.0 && lu / ll >= 1.0 / kTol && lu / ll <= kTol) {
        r.verdict = TailVerdict::heavy;
        r.reason = "tail linear in log x";
        return r;
    }
    const double sl = r.semilog_slope_lower;
    const double su = r.semilog_slope_upper;
    if (sl < 0.0 && su < 0.0 && su / sl >= 1.0 / kTol) {
        const MomentProbe mp = mgf_probe(tail, default_theta_grid());
        for (std::size_t i = 0; i < mp.stable.size(); ++i)
            if (mp.stable[i]) r.stable_theta = mp.theta_grid[i];
        if (r.stable_theta > 0.0) {
            r.verdict = TailVerdict::light;
            r.reason = "tail at least linear in x with a stable moment generating function";
            return r;
        }
        r.reason = "semilog decay without a stable moment generating function";
        return r;
    }
    r.reason = "neither semilog nor log-log linear";
    return r;
}

std::string to_string(Trend t) {
    switch (t) {
    case Trend::bounded: return "bounded";
    case Trend::vanishing: return "vanishing";
    case Trend::diverging: return "diverging";
    case Trend::unit: return "unit";
    }
    return "unknown";
}

std::vector<double> auto_tail_grid(const EmpiricalTail& tail, std::size_t points, double lower_q,
                                   std::size_t top_exceedances) {
    const std::size_t n = tail.n();
    if (points < 2) throw ContractError("auto_tail_grid: need at least two points");
    if (!(lower_q > 0.0 && lower_q < 1.0)) throw ContractError("auto_tail_grid: lower_q outside (0,1)");
    const std::size_t n_inf = tail.infinite_count();
    const std::size_t lower_exc = std::max<std::size_t>(
        2 * top_exceedances,
        static_cast<std::size_t>(std::llround(static_cast<double>(n) * (1.0 - lower_q))));
    if (n <= n_inf + lower_exc + 1) throw ContractError("auto_tail_grid: sample too small");
    const auto& s = tail.sorted();
    std::size_t idx = n - std::max(top_exceedances, n_inf) - 1;
    while (idx > 0 && (!std::isfinite(s[idx]) || tail.exceedances(s[idx]) < top_exceedances)) --idx;
    const double hi = s[idx];
    const double lo = s[n - n_inf - lower_exc - 1];
    if (!(lo > 0.0) || !(hi > lo))
        throw ContractError("auto_tail_grid: tail range is empty or nonpositive");
    std::vector<double> g(points);
    for (std::size_t i = 0; i < points; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(points - 1);
        g[i] = std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)));
    }
    g.front() = lo;
    g.back() = hi;
    return g;
}

RatioCurve ratio_probe(const EmpiricalTail& num, const std::function<double(double)>& ref_tail,
                       const std::vector<double>& grid, const RandomStream& stream,
                       const RatioProbeOptions& opt, Exec exec) {
    const std::size_t G = grid.size();
    if (G < 2) throw ContractError("ratio_probe: grid needs at least two points");
    for (std::size_t i = 0; i < G; ++i) {
        if (!(grid[i] > 0.0) || !std::isfinite(grid[i]))
            throw ContractError("ratio_probe: grid must be positive and finite");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw ContractError("ratio_probe: grid must be strictly increasing");
    }
    const double n = static_cast<double>(num.n());
    RatioCurve rc;
    rc.x_grid = grid;
    std::vector<double> ref(G);
    for (std::size_t i = 0; i < G; ++i) {
        rc.exceedances.push_back(num.exceedances(grid[i]));
        ref[i] = ref_tail(grid[i]);
        if (!(ref[i] > 0.0)) throw ContractError("ratio_probe: reference tail must be positive on the grid");
        rc.ratio.push_back(static_cast<double>(rc.exceedances[i]) / n / ref[i]);
    }
    if (rc.exceedances.back() < opt.min_exceedances)
        throw ContractError("ratio_probe: fewer than " + std::to_string(opt.min_exceedances) +
                            " exceedances at the largest grid point");

    const TopHalf h = top_half(G);
    std::vector<double> counts(G);
    for (std::size_t i = 0; i < G; ++i) counts[i] = static_cast<double>(rc.exceedances[i]);
    rc.slope = top_slope(grid, rc.ratio, counts, h);
    rc.asymptote = top_mean(rc.ratio, counts, h);

    // Joint bootstrap: nested exceedance counts by sequential binomial thinning.
    const std::size_t B = opt.bootstrap;
    std::vector<double> boot(B * G);
    std::vector<double> boot_asym(B);
    std::vector<double> boot_slope(B);
    for_each_index(exec, B, [&](std::size_t b) {
        RandomStream s = stream.substream(b);
        std::vector<double> counts(G), ratios(G);
        long prev_count = static_cast<long>(num.n());
        double prev_p = 1.0;
        for (std::size_t i = 0; i < G; ++i) {
            const double p_i = static_cast<double>(rc.exceedances[i]) / n;
            const double cond = prev_p > 0.0 ? std::min(1.0, p_i / prev_p) : 0.0;
            long c = 0;
            if (prev_count > 0 && cond > 0.0) {
                boost::random::binomial_distribution<long, double> bin(prev_count, cond);
                c = bin(s);
            }
            counts[i] = static_cast<double>(c);
            ratios[i] = counts[i] / n / ref[i];
            boot[b * G + i] = ratios[i];
            prev_count = c;
            prev_p = p_i;
        }
        boot_asym[b] = top_mean(ratios, counts, h);
        boot_slope[b] = top_slope(grid, ratios, counts, h);
    });

    const double lo_p = (1.0 - opt.confidence) / 2.0;
    const double hi_p = 1.0 - lo_p;
    for (std::size_t i = 0; i < G; ++i) {
        std::vector<double> col(B);
        for (std::size_t b = 0; b < B; ++b) col[b] = boot[b * G + i];
        rc.ci_lo.push_back(percentile(col, lo_p));
        rc.ci_hi.push_back(percentile(col, hi_p));
        rc.ci_halfwidth.push_back(0.5 * (rc.ci_hi.back() - rc.ci_lo.back()));
    }
    rc.asymptote_ci_lo = percentile(boot_asym, lo_p);
    rc.asymptote_ci_hi = percentile(boot_asym, hi_p);
    std::vector<double> finite_slopes;
    for (double v : boot_slope)
        if (std::isfinite(v)) finite_slopes.push_back(v);
    if (finite_slopes.size() < B / 2) throw ContractError("ratio_probe: bootstrap slopes undefined");
    rc.slope_ci_lo = percentile(finite_slopes, lo_p);
    rc.slope_ci_hi = percentile(finite_slopes, hi_p);

    // A trend away from bounded needs the whole slope band beyond the threshold.
    if (rc.slope_ci_lo > opt.slope_threshold) {
        rc.trend = Trend::diverging;
    } else if (rc.slope_ci_hi < -opt.slope_threshold) {
        rc.trend = Trend::vanishing;
    } else if (rc.asymptote_ci_lo <= 1.0 && 1.0 <= rc.asymptote_ci_hi) {
        rc.trend = Trend::unit;
    } else {
        rc.trend = Trend::bounded;
    }
    return rc;
}

std::vector<double> sample_chunked(const DistributionSpec& spec, const RandomStream& stream,
                                   std::size_t n, Exec exec) {
    validate(spec);
    constexpr std::size_t kChunk = 1u << 16;
    std::vector<double> out(n);
    const std::size_t chunks = (n + kChunk - 1) / kChunk;
    for_each_index(exec, chunks, [&](std::size_t c) {
        RandomStream s = stream.substream(c);
        const std::size_t end = std::min(n, (c + 1) * kChunk);
        for (std::size_t i = c * kChunk; i < end; ++i) out[i] = sample_one(spec, s);
    });
    return out;
}

namespace {

CompositionReport composition_experiment(bool product, const DistributionSpec& spec1,
                                         const DistributionSpec& spec2, double phi_alpha,
                                         const RandomStream& stream, std::size_t n, Exec exec) {
    if (n < 1000000) throw ContractError("composition experiment: requires n >= 1e6");
    if (!(phi_alpha > 0.0 && phi_alpha < 1.0))
        throw ContractError("composition experiment: phi_alpha must lie in (0,1)");
    validate(spec1);
    validate(spec2);
    const auto x1 = sample_chunked(spec1, stream.derive("x1"), n, exec);
    const auto x2 = sample_chunked(spec2, stream.derive("x2"), n, exec);
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = product ? x1[i] * x2[i] : x1[i] + x2[i];

    CompositionReport rep;
    rep.experiment = product ? "product" : "sum";
    rep.spec1 = spec1;
    rep.spec2 = spec2;
    rep.phi_alpha = phi_alpha;
    const EmpiricalTail tz(std::move(z));
    const auto grid = auto_tail_grid(tz);
    rep.curve = ratio_probe(tz, [&](double x) { return survival(spec1, x); }, grid,
                            stream.derive("bootstrap"), {}, exec);

    const EmpiricalTail t2(x2);
    rep.dominant_mass.resize(grid.size());
    rep.dominated_mass.resize(grid.size());
    for_each_index(exec, grid.size(), [&](std::size_t g) {
        const double x = grid[g];
        const double cut = std::pow(x, phi_alpha);
        rep.dominated_mass[g] = t2.survival(cut);
        if (product) {
            CompensatedSum acc;
            for (double v : x2)
                if (v <= cut) acc.add(survival(spec1, x / v));
            rep.dominant_mass[g] = acc.value() / static_cast<double>(n);
        } else {
            rep.dominant_mass[g] = survival(spec1, x - cut);
        }
    });
    return rep;
}

} // namespace

CompositionReport product_tail_experiment(const DistributionSpec& spec1,
                                          const DistributionSpec& spec2, double phi_alpha,
                                          const RandomStream& stream, std::size_t n, Exec exec) {
    return composition_experiment(true, spec1, spec2, phi_alpha, stream, n, exec);
}

CompositionReport sum_tail_experiment(const DistributionSpec& spec1, const DistributionSpec& spec2,
                                      const RandomStream& stream, std::size_t n, double phi_alpha,
                                      Exec exec) {
    return composition_experiment(false, spec1, spec2, phi_alpha, stream, n, exec);
}

ClosureReport comonotone_closure(const DistributionSpec& spec, int copies, const RandomStream& stream,
                                 std::size_t n, Exec exec) {
    validate(spec);
    if (copies < 2) throw ContractError("comonotone_closure: need at least two copies");
    if (n < 100000) throw ContractError("comonotone_closure: n must be at least 1e5");
    if (!(quantile(spec, 1e-12) >= 0.0)) throw ContractError("comonotone_closure: law must be nonnegative");
    const auto N = static_cast<std::size_t>(copies);
    const auto draws = norta(sample_copula(CopulaSpec::comonotone(N), stream.derive("copula"), n, exec),
                             std::vector<DistributionSpec>(N, spec));
    std::vector<double> sums(n), products(n);
    for (std::size_t r = 0; r < n; ++r) {
        double s = 0.0, p = 1.0;
        for (std::size_t k = 0; k < N; ++k) {
            s += draws(r, k);
            p *= draws(r, k);
        }
        sums[r] = s;
        products[r] = p;
    }
    constexpr std::size_t kPoints = 10;
    RatioProbeOptions opt;
    opt.bootstrap = 2000;
    opt.confidence = 1.0 - 0.05 / kPoints;
    std::vector<double> level(kPoints);
    for (std::size_t k = 0; k < kPoints; ++k)
        level[k] = std::pow(10.0, -1.0 - 2.0 * static_cast<double>(k) / (kPoints - 1));  // 1e-1 .. 1e-3
    const double dn = static_cast<double>(N);
    std::vector<double> sum_grid(kPoints), product_grid(kPoints);
    for (std::size_t k = 0; k < kPoints; ++k) {
        const double x = quantile(spec, 1.0 - level[k]);
        sum_grid[k] = dn * x;
        product_grid[k] = std::pow(x, dn);
    }
    const auto covers_one = [](const RatioCurve& c) {
        for (std::size_t i = 0; i < c.ratio.size(); ++i)
            if (!(c.ci_lo[i] <= 1.0 && 1.0 <= c.ci_hi[i])) return false;
        return true;
    };
    ClosureReport rep;
    rep.spec = spec;
    rep.copies = copies;
    rep.sum = ratio_probe(EmpiricalTail(std::move(sums)), [&](double x) { return survival(spec, x / dn); }, sum_grid,
                          stream.derive("bootstrap-sum"), opt, exec);
    rep.product = ratio_probe(EmpiricalTail(std::move(products)),
                              [&](double x) { return survival(spec, std::pow(x, 1.0 / dn)); }, product_grid,
                              stream.derive("bootstrap-product"), opt, exec);
    rep.sum_agrees = covers_one(rep.sum);
    rep.product_agrees = covers_one(rep.product);
    return rep;
}

const std::vector<CompositionPreset>& composition_presets() {
    using D = DistributionSpec;
    static const std::vector<CompositionPreset> presets = {
        {"L2-1a", false, D::pareto1(1.5, 1.0), D::exponential(1.0), 0.5, Trend::unit},
        {"L2-1b", false, D::pareto1(1.0, 1.0), D::pareto1(4.0, 1.0), 0.5, Trend::unit},
        {"L2-2a", true, D::logpareto(1.0, 1.0), D::exponential(1.0), 0.5, Trend::unit},
        {"L2-2b", true, D::logpareto(1.0, 1.0), D::pareto1(2.0, 1.0), 0.5, Trend::unit},
        {"L2-3a", true, D::pareto1(2.0, 1.0), D::exponential(1.0), 0.5, Trend::bounded},
        {"L2-3b", true, D::pareto1(2.0, 1.0), D::pareto1(5.0, 1.0), 0.5, Trend::bounded},
        {"L2-4a", true, D::exponential(1.0), D::exponential(1.0), 0.5, Trend::diverging},
        {"L2-4b", true, D::exponential(1.0), D::pareto1(3.0, 1.0), 0.5, Trend::diverging},
    };
    return presets;
}

const CompositionPreset& composition_preset(const std::string& name) {
    for (const auto& p : composition_presets())
        if (p.name == name) return p;
    throw SchemaError("preset: unknown composition preset '" + name + "'");
}

std::string to_string(LeftTail t) {
    switch (t) {
    case LeftTail::exp_bounded: return "exp_bounded";
    case LeftTail::poly_bounded: return "poly_bounded";
    case LeftTail::neither: return "neither";
    }
    return "unknown";
}

LeftTail left_tail_probe(const EmpiricalTail& tail, double theta) {
    if (!(theta > 0.0)) throw ContractError("left_tail_probe: theta must be positive");
    const auto& s = tail.sorted();
    if (s.size() < 1000) throw ContractError("left_tail_probe: requires at least 1000 samples");
    if (!(s.front() > 0.0)) throw DomainError("left_tail_probe: samples must be strictly positive");

    // x runs over 1/q(0.1) .. 1/X_(50); P(X < 1/x) is read from the lower tail.
    const double x_lo = std::max(1.0, 1.0 / sorted_quantile(s, 0.1));
    const double x_hi = 1.0 / s[49];
    if (!(x_hi > 2.0 * x_lo)) return LeftTail::exp_bounded;  // no mass near zero
    constexpr std::size_t kPoints = 20;
    std::vector<double> lx, lp;
    for (std::size_t i = 0; i < kPoints; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(kPoints - 1);
        const double x = std::exp(std::log(x_lo) + t * (std::log(x_hi) - std::log(x_lo)));
        const std::size_t c = tail.below(1.0 / x);
        if (c == 0) continue;
        lx.push_back(std::log(x));
        lp.push_back(std::log(static_cast<double>(c) / static_cast<double>(s.size())));
    }
    if (lx.size() < 4) return LeftTail::exp_bounded;
    const std::size_t half = lx.size() / 2;
    auto top_slope = [&](auto&& f) {
        std::vector<double> ax, ay;
        for (std::size_t i = half; i < lx.size(); ++i) {
            ax.push_back(lx[i]);
            ay.push_back(f(i));
        }
        return fit_line(ax, ay).slope;
    };
    const double exp_slope = top_slope([&](std::size_t i) { return lp[i] + theta * std::exp(lx[i]); });
    if (exp_slope <= 0.1) return LeftTail::exp_bounded;
    const double poly_slope = top_slope([&](std::size_t i) { return lp[i] + theta * lx[i]; });
    if (poly_slope <= 0.1) return LeftTail::poly_bounded;
    return LeftTail::neither;
}

const std::vector<std::pair<int, int>>& condition_edges() {
    static const std::vector<std::pair<int, int>> edges = {
        {5, 4}, {4, 1}, {1, 0}, {0, 1}, {3, 2}, {2, 1}, {0, 6}, {6, 0}, {4, 7}, {7, 4},
    };
    return edges;
}

ConditionReport evaluate_conditions(const CapacityBatch& batch, const std::vector<double>& grid) {
    const std::size_t n = batch.samples.size();
    const std::size_t d = batch.stride;
    if (n < 2 || d == 0) throw ContractError("evaluate_conditions: empty batch");
    ConditionReport rep;
    rep.edges = condition_edges();

    std::vector<double> lv(n);
    for (int id = 0; id < kConditionCount; ++id) {
        ConditionRow& row = rep.rows[static_cast<std::size_t>(id)];
        row.id = id;
        row.theta = grid;
        for (double theta : grid) {
            for (std::size_t j = 0; j < n; ++j) {
                const double p = batch.samples[j].power;
                const double* lam = batch.eigenvalues.data() + j * d;
                double mu_max = 0.0;
                double tr = 0.0;
                for (std::size_t i = 0; i < d; ++i) {
                    const double mu = p * std::max(0.0, lam[i]);
                    mu_max = std::max(mu_max, mu);
                    tr += std::max(0.0, lam[i]);
                }
                const double ptr = p * tr;
                auto lse = [&](double scale) {
                    double m = -kInf;
                    for (std::size_t i = 0; i < d; ++i) m = std::max(m, scale * p * std::max(0.0, lam[i]));
                    double acc = 0.0;
                    for (std::size_t i = 0; i < d; ++i)
                        acc += std::exp(scale * p * std::max(0.0, lam[i]) - m);
                    return m + std::log(acc);
                };
                double v = 0.0;
                switch (id) {
                case 0: v = theta * std::log1p(mu_max); break;
                case 1: v = theta * std::log1p(ptr); break;
                case 2: v = theta * std::log(static_cast<double>(d) + ptr); break;
                case 3: v = theta * lse(1.0); break;
                case 4: v = theta * mu_max; break;
                case 5: v = lse(theta); break;
                case 6: v = mu_max > 0.0 ? theta * std::log(mu_max) : -kInf; break;
                case 7: v = theta * ptr; break;
                }
                if (std::isnan(v)) v = kInf;
                lv[j] = v;
            }
            row.checks.push_back(check_log_expectation(lv, HalfSplit::leading));
        }
        // Moment conditions are monotone in theta: divergence at theta
        // carries to every larger grid point.
        bool diverged = false;
        for (const auto& c : row.checks) {
            diverged = diverged || !c.finite;
            row.finite.push_back(!diverged);
        }
        for (std::size_t i = 0; i < grid.size(); ++i)
            if (row.finite[i]) {
                row.finite_any = true;
                row.theta_witness = grid[i];
            }
    }
    for (const auto& [a, b] : rep.edges) {
        if (rep.rows[static_cast<std::size_t>(a)].finite_any &&
            !rep.rows[static_cast<std::size_t>(b)].finite_any)
            rep.violated.emplace_back(a, b);
    }
    rep.dag_consistent = rep.violated.empty();
    return rep;
}

ConditionReport condition_chain_eval(const ChannelModel& model, const DistributionSpec& power_law,
                                     const CapacityParams& params, const RandomStream& stream,
                                     std::size_t n, Exec exec) {
    if (n < 100000) throw ContractError("condition_chain_eval: requires n >= 1e5");
    const auto batch = sample_capacity_batch(model, power_law, params, stream, n, exec);
    return evaluate_conditions(batch, default_theta_grid());
}

} // namespace depctl
