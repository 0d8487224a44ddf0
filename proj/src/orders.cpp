#include "depctl/orders.hpp"

#include "depctl/errors.hpp"
#include "depctl/numeric.hpp"

#include <boost/random/binomial_distribution.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <sstream>

namespace depctl {

namespace {

constexpr std::size_t kMinSamples = 10000;
constexpr std::size_t kRowChunk = 4096;

double standardized_gap(double diff, double var) {
    if (diff <= 0.0) return diff == 0.0 ? 0.0 : (var > 0.0 ? diff / std::sqrt(var) : -std::numeric_limits<double>::infinity());
    return var > 0.0 ? diff / std::sqrt(var) : std::numeric_limits<double>::infinity();
}

// Bootstrap variance floor: curves from constant samples have zero spread.
double variance_floor(double x, double y) {
    const double scale = std::max({1.0, std::abs(x), std::abs(y)});
    return 1e-24 * scale * scale;
}

void require_size(const std::vector<double>& xs, const char* who) {
    if (xs.size() < kMinSamples)
        throw ContractError(std::string(who) + ": at least " + std::to_string(kMinSamples) + " samples required, got " +
                            std::to_string(xs.size()));
}

std::vector<double> negated(const std::vector<double>& xs) {
    std::vector<double> out(xs.size());
    std::transform(xs.begin(), xs.end(), out.begin(), [](double v) { return -v; });
    return out;
}

std::string format_margin(double m) {
    std::ostringstream os;
    os.precision(6);
    os << m;
    return os.str();
}

void finish(OrderVerdict& v) {
    v.margin = -std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < v.z.size(); ++g) {
        if (v.z[g] > v.margin) {
            v.margin = v.z[g];
            v.worst_at = v.t_grid[g];
        }
    }
    v.outcome = outcome_from_margin(v.margin);
}

OrderVerdict combine_witnesses(const std::vector<OrderVerdict>& ws) {
    OrderVerdict v;
    v.relation = Relation::dcx_witness;
    v.margin = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < ws.size(); ++k) {
        v.t_grid.push_back(static_cast<double>(k));
        v.z.push_back(ws[k].margin);
        if (ws[k].margin > v.margin) {
            v.margin = ws[k].margin;
            v.worst_at = static_cast<double>(k);
            v.detail = ws[k].detail;
        }
    }
    v.outcome = outcome_from_margin(v.margin);
    return v;
}

// Unbiased integers in [0, bound) for bound < 2^32, two per 64-bit draw.
class IndexDraws {
public:
    explicit IndexDraws(RandomStream& s) : s_(s) {}
    std::uint32_t below(std::uint32_t bound) {
        std::uint64_t m = static_cast<std::uint64_t>(next()) * bound;
        auto low = static_cast<std::uint32_t>(m);
        if (low < bound) {
            const std::uint32_t threshold = (0u - bound) % bound;
            while (low < threshold) {
                m = static_cast<std::uint64_t>(next()) * bound;
                low = static_cast<std::uint32_t>(m);
            }
        }
        return static_cast<std::uint32_t>(m >> 32);
    }

private:
    std::uint32_t next() {
        if (have_) {
            have_ = false;
            return static_cast<std::uint32_t>(word_ >> 32);
        }
        word_ = s_.next_u64();
        have_ = true;
        return static_cast<std::uint32_t>(word_);
    }
    RandomStream& s_;
    std::uint64_t word_ = 0;
    bool have_ = false;
};

} // namespace

std::vector<double> pooled_grid(const std::vector<const std::vector<double>*>& samples, std::size_t points) {
    if (points < 2) throw ContractError("pooled_grid: need at least 2 points");
    std::vector<double> pooled;
    for (const auto* s : samples) pooled.insert(pooled.end(), s->begin(), s->end());
    if (pooled.empty()) throw ContractError("pooled_grid: no samples");
    std::sort(pooled.begin(), pooled.end());
    const double lo = sorted_quantile(pooled, 0.05);
    const double hi = sorted_quantile(pooled, 0.995);
    std::vector<double> grid(points);
    for (std::size_t g = 0; g < points; ++g)
        grid[g] = lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(points - 1);
    grid.back() = hi;
    return grid;
}

StopLossCurve stop_loss(const std::vector<double>& samples, const std::vector<double>& t_grid,
                        const RandomStream& stream, const StopLossOptions& opts, Exec exec) {
    if (t_grid.empty()) throw ContractError("stop_loss: empty grid");
    if (!std::is_sorted(t_grid.begin(), t_grid.end())) throw ContractError("stop_loss: grid must be ascending");
    require_size(samples, "stop_loss");
    if (opts.bootstrap < 2) throw ContractError("stop_loss: bootstrap needs at least 2 replicates");
    if (samples.size() >= (std::size_t{1} << 32)) throw ContractError("stop_loss: too many samples");
    const std::size_t n = samples.size();
    const std::size_t G = t_grid.size();

    // Bin b holds the sorted samples in (t_{b-1}, t_b]; a sample in bin b
    // contributes to pi(t_g) for every g < b.
    std::vector<double> sorted(samples);
    for (double v : sorted)
        if (!std::isfinite(v)) throw DomainError("stop_loss: non-finite sample");
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::size_t> edge(G + 2, 0);
    for (std::size_t g = 0; g < G; ++g)
        edge[g + 1] = static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), t_grid[g]) - sorted.begin());
    edge[G + 1] = n;
    std::vector<double> bin_sum(G + 1);
    for (std::size_t b = 0; b <= G; ++b)
        bin_sum[b] = compensated_sum(std::span<const double>(sorted.data() + edge[b], edge[b + 1] - edge[b]));
    const auto curve_from_bins = [&](const auto& sum_of, const auto& count_of, std::vector<double>& pi) {
        double tail_sum = 0.0;
        double tail_count = 0.0;
        for (std::size_t g = G; g-- > 0;) {
            tail_sum += sum_of(g + 1);
            tail_count += count_of(g + 1);
            pi[g] = std::max(0.0, (tail_sum - t_grid[g] * tail_count) / static_cast<double>(n));
        }
    };

    StopLossCurve c;
    c.t_grid = t_grid;
    c.n = n;
    c.pi.assign(G, 0.0);
    curve_from_bins([&](std::size_t b) { return bin_sum[b]; },
                    [&](std::size_t b) { return static_cast<double>(edge[b + 1] - edge[b]); }, c.pi);
    c.mean = mean(samples);
    c.variance = variance(samples);

    // Ordinary n-out-of-n resampling, drawn as multinomial bin counts followed
    // by uniform picks inside each bin so memory access stays local.
    const std::size_t B = opts.bootstrap;
    std::vector<double> reps(B * (G + 1));
    for_each_index(exec, B, [&](std::size_t r) {
        RandomStream s = stream.substream(r);
        IndexDraws idx(s);
        std::vector<double> sum(G + 1, 0.0);
        std::vector<double> cnt(G + 1, 0.0);
        long remaining = static_cast<long>(n);
        std::size_t mass_left = n;
        for (std::size_t b = 0; b <= G && remaining > 0; ++b) {
            const std::size_t size = edge[b + 1] - edge[b];
            long draws = remaining;
            if (size < mass_left) {
                const double p = static_cast<double>(size) / static_cast<double>(mass_left);
                boost::random::binomial_distribution<long, double> binom(remaining, p);
                draws = size == 0 ? 0 : binom(s);
            }
            mass_left -= size;
            remaining -= draws;
            double acc = 0.0;
            for (long k = 0; k < draws; ++k) acc += sorted[edge[b] + idx.below(static_cast<std::uint32_t>(size))];
            sum[b] = acc;
            cnt[b] = static_cast<double>(draws);
        }
        std::vector<double> pi(G);
        curve_from_bins([&](std::size_t b) { return sum[b]; }, [&](std::size_t b) { return cnt[b]; }, pi);
        double total = 0.0;
        for (double v : sum) total += v;
        std::copy(pi.begin(), pi.end(), reps.begin() + static_cast<std::ptrdiff_t>(r * (G + 1)));
        reps[r * (G + 1) + G] = total / static_cast<double>(n);
    });

    const double z = normal_quantile(0.5 + opts.confidence / 2.0);
    c.se.assign(G, 0.0);
    c.ci_halfwidth.assign(G, 0.0);
    std::vector<double> col(B);
    for (std::size_t g = 0; g <= G; ++g) {
        for (std::size_t r = 0; r < B; ++r) col[r] = reps[r * (G + 1) + g];
        const double sd = std::sqrt(variance(col));
        if (g < G) {
            c.se[g] = sd;
            c.ci_halfwidth[g] = z * sd;
        } else {
            c.mean_se = sd;
            c.mean_ci = z * sd;
        }
    }
    return c;
}

std::string to_string(Relation r) {
    switch (r) {
    case Relation::st: return "st";
    case Relation::cx: return "cx";
    case Relation::icx: return "icx";
    case Relation::icv: return "icv";
    case Relation::uo_lo_witness: return "uo_lo_witness";
    case Relation::dcx_witness: return "dcx_witness";
    }
    return "?";
}

std::string to_string(Outcome o) {
    switch (o) {
    case Outcome::holds: return "holds";
    case Outcome::fails: return "fails";
    case Outcome::inconclusive: return "inconclusive";
    }
    return "?";
}

Outcome outcome_from_margin(double margin) {
    if (std::isnan(margin)) return Outcome::inconclusive;
    if (margin <= 2.0) return Outcome::holds;
    if (margin > 4.0) return Outcome::fails;
    return Outcome::inconclusive;
}

OrderVerdict compare_icx(const StopLossCurve& a, const StopLossCurve& b) {
    if (a.t_grid != b.t_grid) throw ContractError("compare_icx: curves are on different grids");
    OrderVerdict v;
    v.relation = Relation::icx;
    v.t_grid = a.t_grid;
    v.z.resize(a.t_grid.size());
    for (std::size_t g = 0; g < v.z.size(); ++g) {
        const double var = a.se[g] * a.se[g] + b.se[g] * b.se[g] + variance_floor(a.pi[g], b.pi[g]);
        v.z[g] = standardized_gap(a.pi[g] - b.pi[g], var);
    }
    finish(v);
    return v;
}

OrderVerdict compare_cx(const StopLossCurve& a, const StopLossCurve& b) {
    OrderVerdict v = compare_icx(a, b);
    v.relation = Relation::cx;
    const double var = a.mean_se * a.mean_se + b.mean_se * b.mean_se + variance_floor(a.mean, b.mean);
    const double zm = std::abs(standardized_gap(a.mean - b.mean, var));
    std::ostringstream os;
    os.precision(6);
    os << "icx margin " << v.margin << ", mean gap " << (a.mean - b.mean) << " (" << zm << " se)";
    v.detail = os.str();
    if (zm > v.margin) v.margin = zm;
    v.outcome = outcome_from_margin(v.margin);
    return v;
}

OrderVerdict icx_test(const std::vector<double>& a, const std::vector<double>& b, const RandomStream& stream,
                      const OrderTestOptions& opts, Exec exec) {
    require_size(a, "icx_test");
    require_size(b, "icx_test");
    const auto grid = pooled_grid({&a, &b}, opts.grid_points);
    const StopLossOptions so{opts.bootstrap, opts.confidence};
    return compare_icx(stop_loss(a, grid, stream.derive("a"), so, exec),
                       stop_loss(b, grid, stream.derive("b"), so, exec));
}

OrderVerdict cx_test(const std::vector<double>& a, const std::vector<double>& b, const RandomStream& stream,
                     const OrderTestOptions& opts, Exec exec) {
    require_size(a, "cx_test");
    require_size(b, "cx_test");
    const auto grid = pooled_grid({&a, &b}, opts.grid_points);
    const StopLossOptions so{opts.bootstrap, opts.confidence};
    return compare_cx(stop_loss(a, grid, stream.derive("a"), so, exec),
                      stop_loss(b, grid, stream.derive("b"), so, exec));
}

OrderVerdict icv_test(const std::vector<double>& a, const std::vector<double>& b, const RandomStream& stream,
                      const OrderTestOptions& opts, Exec exec) {
    OrderVerdict v = icx_test(negated(b), negated(a), stream, opts, exec);
    v.relation = Relation::icv;
    for (double& t : v.t_grid) t = -t;
    v.worst_at = -v.worst_at;
    return v;
}

OrderVerdict st_test(const std::vector<double>& a, const std::vector<double>& b, double confidence) {
    require_size(a, "st_test");
    require_size(b, "st_test");
    if (!(confidence > 0.0 && confidence < 1.0)) throw ContractError("st_test: confidence must be in (0,1)");
    std::vector<double> sa(a), sb(b);
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    const double alpha = 1.0 - confidence;
    const auto dkw = [&](std::size_t n) { return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n))); };
    const double eps = dkw(sa.size()) + dkw(sb.size());

    // Largest F_b(x) - F_a(x) over the merged sample points.
    double worst = 0.0;
    double worst_x = sa.front();
    std::size_t i = 0, j = 0;
    const double na = static_cast<double>(sa.size()), nb = static_cast<double>(sb.size());
    while (i < sa.size() || j < sb.size()) {
        const double x = (j >= sb.size() || (i < sa.size() && sa[i] <= sb[j])) ? sa[i] : sb[j];
        while (i < sa.size() && sa[i] <= x) ++i;
        while (j < sb.size() && sb[j] <= x) ++j;
        const double gap = static_cast<double>(j) / nb - static_cast<double>(i) / na;
        if (gap > worst) {
            worst = gap;
            worst_x = x;
        }
    }
    OrderVerdict v;
    v.relation = Relation::st;
    v.margin = 2.0 * worst / eps;
    v.worst_at = worst_x;
    v.t_grid = {worst_x};
    v.z = {v.margin};
    v.outcome = outcome_from_margin(v.margin);
    std::ostringstream os;
    os << "max F_b - F_a = " << worst << ", DKW band " << eps;
    v.detail = os.str();
    return v;
}

std::vector<std::vector<double>> orthant_grid(const UniformMatrix& a, const UniformMatrix& b,
                                              const std::vector<double>& levels) {
    if (a.dim != b.dim) throw ContractError("orthant_grid: dimensions differ");
    std::vector<std::vector<double>> grid(levels.size(), std::vector<double>(a.dim));
    for (std::size_t c = 0; c < a.dim; ++c) {
        std::vector<double> pooled = a.column(c);
        const auto colb = b.column(c);
        pooled.insert(pooled.end(), colb.begin(), colb.end());
        std::sort(pooled.begin(), pooled.end());
        for (std::size_t l = 0; l < levels.size(); ++l) grid[l][c] = sorted_quantile(pooled, levels[l]);
    }
    return grid;
}

OrderVerdict orthant_witness_test(const UniformMatrix& a, const UniformMatrix& b,
                                  const std::vector<std::vector<double>>& c_grid) {
    if (a.dim != b.dim) throw ContractError("orthant_witness_test: dimensions differ");
    if (a.rows == 0 || b.rows == 0) throw ContractError("orthant_witness_test: empty sample");
    if (c_grid.empty()) throw ContractError("orthant_witness_test: empty grid");
    for (std::size_t c = 0; c < a.dim; ++c) {
        const double d = ks_two_sample(a.column(c), b.column(c));
        if (d > ks_critical_1pct(a.rows, b.rows))
            throw ContractError("orthant_witness_test: marginals differ at coordinate " + std::to_string(c) +
                                " (KS " + std::to_string(d) + ")");
    }
    const auto orthant = [](const UniformMatrix& m, const std::vector<double>& c, bool upper) {
        std::size_t hits = 0;
        for (std::size_t r = 0; r < m.rows; ++r) {
            bool in = true;
            for (std::size_t k = 0; k < m.dim && in; ++k) in = upper ? m(r, k) > c[k] : m(r, k) <= c[k];
            hits += in;
        }
        return static_cast<double>(hits) / static_cast<double>(m.rows);
    };
    OrderVerdict v;
    v.relation = Relation::uo_lo_witness;
    const double na = static_cast<double>(a.rows), nb = static_cast<double>(b.rows);
    for (std::size_t g = 0; g < c_grid.size(); ++g) {
        if (c_grid[g].size() != a.dim) throw ContractError("orthant_witness_test: grid point has wrong dimension");
        for (bool upper : {true, false}) {
            const double pa = orthant(a, c_grid[g], upper);
            const double pb = orthant(b, c_grid[g], upper);
            v.z.push_back(standardized_gap(pa - pb, pa * (1 - pa) / na + pb * (1 - pb) / nb));
            v.t_grid.push_back(static_cast<double>(g));
        }
    }
    finish(v);
    v.detail = "upper and lower orthant probabilities at " + std::to_string(c_grid.size()) + " points";
    return v;
}

std::vector<OrderVerdict> dcx_witnesses(const UniformMatrix& a, const UniformMatrix& b, const RandomStream& stream,
                                        const OrderTestOptions& opts, Exec exec) {
    if (a.dim != b.dim) throw ContractError("dcx_witnesses: dimensions differ");
    std::vector<OrderVerdict> out;
    for (std::size_t c = 0; c < a.dim; ++c) {
        OrderVerdict v = icx_test(a.column(c), b.column(c), stream.derive("coord" + std::to_string(c)), opts, exec);
        v.detail = "coordinate " + std::to_string(c) + " stop-loss, margin " + format_margin(v.margin);
        out.push_back(std::move(v));
    }
    for (std::size_t i = 0; i < a.dim; ++i)
        for (std::size_t j = i + 1; j < a.dim; ++j) {
            std::vector<double> sa(a.rows), sb(b.rows);
            for (std::size_t r = 0; r < a.rows; ++r) sa[r] = a(r, i) + a(r, j);
            for (std::size_t r = 0; r < b.rows; ++r) sb[r] = b(r, i) + b(r, j);
            OrderVerdict v = icx_test(sa, sb, stream.derive("pair" + std::to_string(i) + "-" + std::to_string(j)),
                                     opts, exec);
            v.detail = "sum of coordinates " + std::to_string(i) + "+" + std::to_string(j) + " stop-loss, margin " +
                       format_margin(v.margin);
            out.push_back(std::move(v));
        }
    return out;
}

OrderVerdict dcx_witness_test(const UniformMatrix& a, const UniformMatrix& b, const RandomStream& stream,
                              const OrderTestOptions& opts, Exec exec) {
    return combine_witnesses(dcx_witnesses(a, b, stream, opts, exec));
}

PartialSumReport partial_sum_order_experiment(const SmPair& pair, const std::vector<double>& weights,
                                              const RandomStream& stream, std::size_t paths,
                                              const OrderTestOptions& opts, Exec exec) {
    for (double w : weights)
        if (!(w >= 0.0)) throw ContractError("partial_sum_order_experiment: weights must be nonnegative");
    const auto lo = gen_process(pair.lo, stream.derive("lo"), paths, exec).weighted_sums(weights);
    const auto hi = gen_process(pair.hi, stream.derive("hi"), paths, exec).weighted_sums(weights);
    require_size(lo, "partial_sum_order_experiment");
    const auto grid = pooled_grid({&lo, &hi}, opts.grid_points);
    const StopLossOptions so{opts.bootstrap, opts.confidence};
    PartialSumReport rep;
    rep.lo = stop_loss(lo, grid, stream.derive("boot-lo"), so, exec);
    rep.hi = stop_loss(hi, grid, stream.derive("boot-hi"), so, exec);
    rep.verdict = compare_cx(rep.lo, rep.hi);
    rep.certificates = pair.certificates;
    return rep;
}

StrengthReport marginal_strength_experiment(const ProcessSpec& base, const std::vector<DistributionSpec>& modified,
                                            const RandomStream& stream, std::size_t paths,
                                            const OrderTestOptions& opts, Exec exec) {
    validate(base);
    if (base.coords != 1) throw ContractError("marginal_strength_experiment: base must have one coordinate");
    if (modified.size() != base.T)
        throw ContractError("marginal_strength_experiment: need one modified marginal per time position");
    const auto& cop = base.temporal;
    const bool increasing = cop.kind == CopulaKind::independence || cop.kind == CopulaKind::comonotone ||
                            ((cop.kind == CopulaKind::gaussian_ar1 || cop.kind == CopulaKind::gaussian_exchangeable) &&
                             cop.param >= 0.0);
    if (!increasing)
        throw ContractError("marginal_strength_experiment: temporal copula must be conditionally increasing "
                            "(Gaussian with rho >= 0, independence or comonotone)");

    StrengthReport rep;
    std::vector<std::vector<double>> sums;
    for (std::size_t k = 0; k <= base.T; ++k) {
        ProcessSpec spec = base;
        spec.marginals.resize(base.T);
        for (std::size_t j = 0; j < base.T; ++j) spec.marginals[j] = j < k ? modified[j] : base.marginal(j, 0);
        sums.push_back(gen_process(spec, stream.derive("k" + std::to_string(k)), paths, exec).weighted_sums());
    }
    std::vector<const std::vector<double>*> ptrs;
    for (const auto& s : sums) ptrs.push_back(&s);
    const auto grid = pooled_grid(ptrs, opts.grid_points);
    const StopLossOptions so{opts.bootstrap, opts.confidence};
    for (std::size_t k = 0; k <= base.T; ++k)
        rep.curves.push_back(stop_loss(sums[k], grid, stream.derive("boot" + std::to_string(k)), so, exec));
    rep.all_hold = true;
    for (std::size_t k = 0; k <= base.T; ++k)
        for (std::size_t k2 = k + 1; k2 <= base.T; ++k2) {
            rep.k_lo.push_back(k);
            rep.k_hi.push_back(k2);
            rep.verdicts.push_back(compare_icx(rep.curves[k], rep.curves[k2]));
            rep.all_hold = rep.all_hold && rep.verdicts.back().outcome == Outcome::holds;
        }
    return rep;
}

std::vector<double> default_delta_grid() { return {0.0, 0.0025, 0.005, 0.0075, 0.01, 0.02, 0.05, 0.1}; }

BiasReport dependence_bias_experiment(const ProcessSpec& neg, const std::vector<double>& delta_grid,
                                      const RandomStream& stream, std::size_t paths,
                                      const OrderTestOptions& opts, Exec exec) {
    validate(neg);
    if (delta_grid.empty()) throw ContractError("dependence_bias_experiment: empty delta grid");
    if (!std::is_sorted(delta_grid.begin(), delta_grid.end()) || delta_grid.front() < 0.0)
        throw ContractError("dependence_bias_experiment: delta grid must be ascending and nonnegative");
    ProcessSpec indep = neg;
    indep.temporal = CopulaSpec::independence(neg.T);
    indep.spatial = CopulaSpec::independence(neg.coords);
    indep.allow_both = false;
    const auto base = gen_process(indep, stream.derive("independent"), paths, exec).weighted_sums();
    // Shifting every marginal by delta shifts each path sum by delta * T * coords exactly.
    const auto dependent = gen_process(neg, stream.derive("dependent"), paths, exec).weighted_sums();
    const double entries = static_cast<double>(neg.T * neg.coords);

    BiasReport rep;
    rep.delta = delta_grid;
    const StopLossOptions so{opts.bootstrap, opts.confidence};
    bool chain = true;
    for (std::size_t k = 0; k < delta_grid.size(); ++k) {
        std::vector<double> boosted(dependent);
        for (double& v : boosted) v += delta_grid[k] * entries;
        const auto grid = pooled_grid({&boosted, &base}, opts.grid_points);
        auto v = compare_icx(stop_loss(boosted, grid, stream.derive("boot-dependent"), so, exec),
                             stop_loss(base, grid, stream.derive("boot-independent"), so, exec));
        std::ostringstream os;
        os << "delta " << delta_grid[k];
        v.detail = os.str();
        const bool holds = v.outcome == Outcome::holds;
        if (k == 0 && delta_grid[0] == 0.0) rep.holds_at_zero = holds;
        if (chain && holds) rep.delta_star = delta_grid[k];
        chain = chain && holds;
        rep.verdicts.push_back(std::move(v));
    }
    rep.outcome = rep.delta_star > 0.0 ? Outcome::holds : Outcome::fails;
    return rep;
}

RandomSumReport random_sum_experiment(const RandomSumConfig& cfg, const RandomStream& stream, std::size_t n,
                                      const OrderTestOptions& opts, Exec exec) {
    if (cfg.increments_depend_on_counts)
        throw ContractError("random_sum_experiment: counts must be independent of the increments");
    validate(cfg.count_law);
    const bool integer_law = cfg.count_law.family == Family::poisson ||
                             (cfg.count_law.family == Family::constant && cfg.count_law.p1 >= 0.0 &&
                              std::floor(cfg.count_law.p1) == cfg.count_law.p1);
    if (!integer_law || cfg.count_law.shift != 0.0 || cfg.count_law.scale != 1.0)
        throw ContractError("random_sum_experiment: count law must be Poisson or a nonnegative integer constant");
    const std::size_t d = cfg.counts_lo.dim;
    if (cfg.counts_hi.dim != d || cfg.increments_lo.size() != d || cfg.increments_hi.size() != d)
        throw ContractError("random_sum_experiment: dimensions of counts and increments disagree");

    // Certify the count vectors as comparable (identical marginals, sm-ordered copulas).
    ProcessSpec lo_counts{1, d, std::vector<DistributionSpec>(d, cfg.count_law), CopulaSpec::independence(1), cfg.counts_lo, false};
    ProcessSpec hi_counts{1, d, std::vector<DistributionSpec>(d, cfg.count_law), CopulaSpec::independence(1), cfg.counts_hi, false};
    const SmPair certified = sm_pair(lo_counts, hi_counts);

    const auto simulate = [&](const CopulaSpec& cop, const std::vector<DistributionSpec>& incr, const std::string& tag) {
        for (const auto& s : incr) validate(s);
        const CopulaSampler sampler(cop);
        const RandomStream counts = stream.derive("counts-" + tag);
        const RandomStream steps = stream.derive("increments-" + tag);
        UniformMatrix out{n, d, std::vector<double>(n * d)};
        const std::size_t chunks = (n + kRowChunk - 1) / kRowChunk;
        for_each_index(exec, chunks, [&](std::size_t c) {
            RandomStream cs = counts.substream(c);
            RandomStream ss = steps.substream(c);
            std::vector<double> u(d);
            const std::size_t end = std::min(n, (c + 1) * kRowChunk);
            for (std::size_t r = c * kRowChunk; r < end; ++r) {
                sampler.draw(cs, u.data());
                for (std::size_t k = 0; k < d; ++k) {
                    const auto count = static_cast<long>(quantile(cfg.count_law, u[k]));
                    double total = 0.0;
                    for (long j = 0; j < count; ++j) total += sample_one(incr[k], ss);
                    out.data[r * d + k] = total;
                }
            }
        });
        return out;
    };
    const auto lo = simulate(cfg.counts_lo, cfg.increments_lo, "lo");
    const auto hi = simulate(cfg.counts_hi, cfg.increments_hi, "hi");

    RandomSumReport rep;
    rep.witnesses = dcx_witnesses(lo, hi, stream.derive("witness"), opts, exec);
    rep.verdict = combine_witnesses(rep.witnesses);
    rep.verdict.detail = "counts: " + certified.certificates.front() + "; worst " + rep.verdict.detail;
    return rep;
}

} // namespace depctl
