#pragma once

#include "depctl/dependence.hpp"
#include "depctl/distributions.hpp"
#include "depctl/parallel.hpp"
#include "depctl/random_stream.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace depctl {

/// Empirical stop-loss transform pi(t) = E[(S - t)+] with bootstrap
/// standard errors.
struct StopLossCurve {
    std::vector<double> t_grid;
    std::vector<double> pi;
    std::vector<double> se;
    std::vector<double> ci_halfwidth;
    double mean = 0.0;
    double mean_se = 0.0;
    double mean_ci = 0.0;
    double variance = 0.0;
    std::size_t n = 0;
};

struct StopLossOptions {
    std::size_t bootstrap = 200;
    double confidence = 0.95;
};

/// 41 points spanning the pooled [q05, q99.5] of the given sample sets.
std::vector<double> pooled_grid(const std::vector<const std::vector<double>*>& samples, std::size_t points = 41);

StopLossCurve stop_loss(const std::vector<double>& samples, const std::vector<double>& t_grid,
                        const RandomStream& stream, const StopLossOptions& opts = {},
                        Exec exec = Exec::parallel);

enum class Relation { st, cx, icx, icv, uo_lo_witness, dcx_witness };
enum class Outcome { holds, fails, inconclusive };

std::string to_string(Relation r);
std::string to_string(Outcome o);

/// `margin` is the worst standardized violation (in standard errors) over the
/// grid; holds when margin <= 2, fails when margin > 4.
struct OrderVerdict {
    Relation relation = Relation::icx;
    Outcome outcome = Outcome::inconclusive;
    double margin = 0.0;
    double worst_at = 0.0;
    std::vector<double> t_grid;
    std::vector<double> z;  // standardized a-minus-b gap per grid point
    std::string detail;
};

Outcome outcome_from_margin(double margin);

/// a <=icx b from two curves on a common grid.
OrderVerdict compare_icx(const StopLossCurve& a, const StopLossCurve& b);
/// a <=cx b: icx on the curves plus equal means within the standard error band.
OrderVerdict compare_cx(const StopLossCurve& a, const StopLossCurve& b);

struct OrderTestOptions {
    double confidence = 0.95;
    std::size_t bootstrap = 200;
    std::size_t grid_points = 41;
};

OrderVerdict icx_test(const std::vector<double>& a, const std::vector<double>& b, const RandomStream& stream,
                      const OrderTestOptions& opts = {}, Exec exec = Exec::parallel);
OrderVerdict cx_test(const std::vector<double>& a, const std::vector<double>& b, const RandomStream& stream,
                     const OrderTestOptions& opts = {}, Exec exec = Exec::parallel);
/// a <=icv b, tested as -b <=icx -a.
OrderVerdict icv_test(const std::vector<double>& a, const std::vector<double>& b, const RandomStream& stream,
                      const OrderTestOptions& opts = {}, Exec exec = Exec::parallel);
/// a <=st b via DKW bands on both empirical CDFs.
OrderVerdict st_test(const std::vector<double>& a, const std::vector<double>& b, double confidence = 0.95);

/// Diagonal orthant points: for each level, the vector of coordinate quantiles
/// of the pooled rows.
std::vector<std::vector<double>> orthant_grid(const UniformMatrix& a, const UniformMatrix& b,
                                              const std::vector<double>& levels = {0.1, 0.25, 0.5, 0.75, 0.9});

/// Upper- and lower-orthant witnesses of a <=sm b. Rows are vectors.
OrderVerdict orthant_witness_test(const UniformMatrix& a, const UniformMatrix& b,
                                  const std::vector<std::vector<double>>& c_grid);

/// Componentwise and pairwise-sum cx comparisons of the rows, one verdict each.
std::vector<OrderVerdict> dcx_witnesses(const UniformMatrix& a, const UniformMatrix& b, const RandomStream& stream,
                                        const OrderTestOptions& opts = {}, Exec exec = Exec::parallel);
/// All dcx witnesses combined; margin is the worst over witnesses.
OrderVerdict dcx_witness_test(const UniformMatrix& a, const UniformMatrix& b, const RandomStream& stream,
                              const OrderTestOptions& opts = {}, Exec exec = Exec::parallel);

struct PartialSumReport {
    OrderVerdict verdict;
    StopLossCurve lo;
    StopLossCurve hi;
    std::vector<std::string> certificates;
};

/// cx comparison of weighted path sums; empty weights mean all ones.
PartialSumReport partial_sum_order_experiment(const SmPair& pair, const std::vector<double>& weights,
                                              const RandomStream& stream, std::size_t paths,
                                              const OrderTestOptions& opts = {}, Exec exec = Exec::parallel);

struct StrengthReport {
    /// Curves of S_k = sum of the path with the first k positions modified.
    std::vector<StopLossCurve> curves;
    /// icx verdicts for every pair k < k', in lexicographic order.
    std::vector<std::size_t> k_lo;
    std::vector<std::size_t> k_hi;
    std::vector<OrderVerdict> verdicts;
    bool all_hold = false;
};

/// `base` must have coords == 1; `modified[j]` replaces the marginal of time
/// position j when j < k.
StrengthReport marginal_strength_experiment(const ProcessSpec& base, const std::vector<DistributionSpec>& modified,
                                            const RandomStream& stream, std::size_t paths,
                                            const OrderTestOptions& opts = {}, Exec exec = Exec::parallel);

struct BiasReport {
    std::vector<double> delta;
    std::vector<OrderVerdict> verdicts;
    /// Largest grid delta such that every delta' <= delta holds; 0 when delta = 0 fails.
    double delta_star = 0.0;
    bool holds_at_zero = false;
    Outcome outcome = Outcome::inconclusive;
};

std::vector<double> default_delta_grid();

/// Sum of `neg` with every marginal shifted by +delta against the sum of the
/// same marginals under independence, for each delta in the grid.
BiasReport dependence_bias_experiment(const ProcessSpec& neg, const std::vector<double>& delta_grid,
                                      const RandomStream& stream, std::size_t paths,
                                      const OrderTestOptions& opts = {}, Exec exec = Exec::parallel);

struct RandomSumConfig {
    DistributionSpec count_law = DistributionSpec::poisson(5.0);
    CopulaSpec counts_lo = CopulaSpec::independence(2);
    CopulaSpec counts_hi = CopulaSpec::comonotone(2);
    /// Increment law per coordinate for each side.
    std::vector<DistributionSpec> increments_lo;
    std::vector<DistributionSpec> increments_hi;
    /// The construction draws counts and increments independently; a config
    /// asking otherwise is refused.
    bool increments_depend_on_counts = false;
};

struct RandomSumReport {
    OrderVerdict verdict;
    std::vector<OrderVerdict> witnesses;
};

RandomSumReport random_sum_experiment(const RandomSumConfig& cfg, const RandomStream& stream, std::size_t n,
                                      const OrderTestOptions& opts = {}, Exec exec = Exec::parallel);

} // namespace depctl
