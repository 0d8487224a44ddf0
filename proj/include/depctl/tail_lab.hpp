#pragma once

#include "depctl/channel.hpp"
#include "depctl/distributions.hpp"
#include "depctl/parallel.hpp"
#include "depctl/random_stream.hpp"

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace depctl {

/// Sample sorted ascending. Non-finite (+inf) values are kept at the top.
class EmpiricalTail {
public:
    EmpiricalTail() = default;
    explicit EmpiricalTail(std::vector<double> samples);

    std::size_t n() const noexcept { return sorted_.size(); }
    const std::vector<double>& sorted() const noexcept { return sorted_; }
    /// Number of samples strictly greater than x.
    std::size_t exceedances(double x) const;
    /// Number of samples strictly less than x.
    std::size_t below(double x) const;
    double survival(double x) const;
    std::size_t infinite_count() const;

private:
    std::vector<double> sorted_;
};

/// Hill estimator on the top k order statistics.
double hill(const EmpiricalTail& tail, std::size_t k);

/// {2^-10, ..., 2^3}.
std::vector<double> default_theta_grid();

/// Divergence diagnostic for an empirical expectation E[g], computed from
/// log g values. Divergent when any value is non-finite, the half-sample
/// and full-sample estimates differ by more than 25%, the largest term
/// carries more than a quarter of the sum, or the Hill index of g over its
/// top k = clamp(n/100, 10, 1000) terms is at most 1.1.
struct MomentCheck {
    double log_estimate = 0.0;  // log of the full-sample mean
    double growth = 0.0;        // |full/half - 1|
    double max_share = 0.0;
    double hill_index = 0.0;    // +inf when the top spacings vanish
    bool finite = true;
};

enum class HalfSplit { leading, hashed };

/// `split` selects the half: the first n/2 values (i.i.d. input order) or a
/// hash-scattered half (sorted input).
MomentCheck check_log_expectation(std::span<const double> log_values, HalfSplit split);

struct MomentProbe {
    std::vector<double> theta_grid;
    std::vector<double> estimates;  // may be +inf on overflow
    std::vector<bool> stable;
    std::vector<MomentCheck> checks;
    /// Mean excess over the top k1 = clamp(n/1000, 50, 1000) points divided
    /// by the mean excess over the top 10 k1; 0 when n is too small.
    double mean_excess_ratio = 0.0;
};

/// Empirical E[e^{theta X}] over the grid with stability flags. A finite MGF
/// needs a bounded mean excess, so a ratio above 1.5 marks every theta
/// unstable, including those too small for the sample maximum to dominate.
MomentProbe mgf_probe(const EmpiricalTail& tail, const std::vector<double>& theta_grid);

enum class TailVerdict { light, heavy, inconclusive };
std::string to_string(TailVerdict v);

struct LightTailResult {
    TailVerdict verdict = TailVerdict::inconclusive;
    std::size_t points = 0;  // samples in the top decade
    double semilog_slope_lower = 0.0;
    double semilog_slope_upper = 0.0;
    double loglog_slope_lower = 0.0;
    double loglog_slope_upper = 0.0;
    double stable_theta = 0.0;  // largest stable mgf grid point, 0 if none
    std::string reason;
};

/// Classifies the right tail from the top decade of the sample.
LightTailResult light_tail_test(const EmpiricalTail& tail);

enum class Trend { bounded, vanishing, diverging, unit };
std::string to_string(Trend t);
/// True for bounded and its refinement unit.
inline bool is_bounded(Trend t) { return t == Trend::bounded || t == Trend::unit; }

struct RatioProbeOptions {
    std::size_t bootstrap = 200;
    double slope_threshold = 0.1;
    std::size_t min_exceedances = 50;
    double confidence = 0.95;
};

struct RatioCurve {
    std::vector<double> x_grid;
    std::vector<double> ratio;
    std::vector<double> ci_lo;
    std::vector<double> ci_hi;
    std::vector<double> ci_halfwidth;
    std::vector<std::size_t> exceedances;
    Trend trend = Trend::bounded;
    double slope = 0.0;
    double slope_ci_lo = 0.0;
    double slope_ci_hi = 0.0;
    double asymptote = 0.0;
    double asymptote_ci_lo = 0.0;
    double asymptote_ci_hi = 0.0;
};

/// Geometric grid of `points` values. The upper end is the largest finite
/// order statistic with at least `top_exceedances` samples above it; the
/// lower end has n(1 - lower_q) finite samples above it (at least twice
/// `top_exceedances`), so infinite draws do not collapse the range.
std::vector<double> auto_tail_grid(const EmpiricalTail& tail, std::size_t points = 20,
                                   double lower_q = 0.999, std::size_t top_exceedances = 100);

/// F_num(x)/ref_tail(x) with joint bootstrap bands. The slope is the
/// count-weighted least-squares slope of log ratio on log x over the top
/// half of the grid. The trend is diverging (vanishing) when the slope's
/// bootstrap band lies entirely above +threshold (below -threshold), else
/// bounded; bounded is refined to unit when the band of the asymptote (the
/// count-weighted mean ratio over the same points) covers 1.
RatioCurve ratio_probe(const EmpiricalTail& num, const std::function<double(double)>& ref_tail,
                       const std::vector<double>& x_grid, const RandomStream& stream,
                       const RatioProbeOptions& options = {}, Exec exec = Exec::parallel);

struct CompositionReport {
    std::string experiment;  // "product" or "sum"
    DistributionSpec spec1;
    DistributionSpec spec2;
    double phi_alpha = 0.5;
    RatioCurve curve;
    /// Split masses of the tail decomposition at each grid point:
    /// product: E[F1(x/X2) 1{X2 <= x^a}] and P(X2 > x^a);
    /// sum: P(X1 > x - x^a) and P(X2 > x^a).
    std::vector<double> dominant_mass;
    std::vector<double> dominated_mass;
};

/// Draws n values of spec in parallel-safe chunks (chunk c uses
/// stream.substream(c)); the result does not depend on the thread count.
std::vector<double> sample_chunked(const DistributionSpec& spec, const RandomStream& stream,
                                   std::size_t n, Exec exec = Exec::parallel);

CompositionReport product_tail_experiment(const DistributionSpec& spec1,
                                          const DistributionSpec& spec2, double phi_alpha,
                                          const RandomStream& stream, std::size_t n,
                                          Exec exec = Exec::parallel);
CompositionReport sum_tail_experiment(const DistributionSpec& spec1, const DistributionSpec& spec2,
                                      const RandomStream& stream, std::size_t n,
                                      double phi_alpha = 0.5, Exec exec = Exec::parallel);

struct CompositionPreset {
    std::string name;
    bool product = true;
    DistributionSpec spec1;
    DistributionSpec spec2;
    double phi_alpha = 0.5;
    Trend expected;
};

const std::vector<CompositionPreset>& composition_presets();
const CompositionPreset& composition_preset(const std::string& name);

/// Comonotone copies X_1 = ... = X_N of one law: the empirical tails of the
/// sum and the product against F_X(x/N) and F_X(x^(1/N)) at 10 grid points.
/// Bands are simultaneous over the grid (Bonferroni, 2000 resamples).
struct ClosureReport {
    DistributionSpec spec;
    int copies = 2;
    RatioCurve sum;
    RatioCurve product;
    bool sum_agrees = false;
    bool product_agrees = false;
};

ClosureReport comonotone_closure(const DistributionSpec& spec, int copies, const RandomStream& stream,
                                 std::size_t n, Exec exec = Exec::parallel);

enum class LeftTail { exp_bounded, poly_bounded, neither };
std::string to_string(LeftTail t);

LeftTail left_tail_probe(const EmpiricalTail& tail, double theta);

constexpr int kConditionCount = 8;

struct ConditionRow {
    int id = 0;
    std::vector<double> theta;
    std::vector<MomentCheck> checks;
    std::vector<bool> finite;  // after monotone closure in theta
    bool finite_any = false;
    double theta_witness = 0.0;  // largest finite theta, 0 when none
};

struct ConditionReport {
    std::array<ConditionRow, kConditionCount> rows;
    std::vector<std::pair<int, int>> edges;
    std::vector<std::pair<int, int>> violated;
    bool dag_consistent = true;
};

/// Implication edges a -> b among the circled conditions (equivalences as
/// two edges).
const std::vector<std::pair<int, int>>& condition_edges();

/// Evaluates the eight conditions on pre-drawn periods.
ConditionReport evaluate_conditions(const CapacityBatch& batch,
                                    const std::vector<double>& theta_grid);

ConditionReport condition_chain_eval(const ChannelModel& model, const DistributionSpec& power_law,
                                     const CapacityParams& params, const RandomStream& stream,
                                     std::size_t n, Exec exec = Exec::parallel);

} // namespace depctl
