// Acceptance suite: one PASS/FAIL line per criterion.
//
// Usage: depctl_acceptance [--expect-fail N]... [--only N]...
// Exit status is 0 when every failing criterion was named with
// --expect-fail and every named criterion did fail; 1 otherwise.

#include "depctl/channel.hpp"
#include "depctl/dependence.hpp"
#include "depctl/distributions.hpp"
#include "depctl/harness.hpp"
#include "depctl/hermitian_eigen.hpp"
#include "depctl/orders.hpp"
#include "depctl/queueing.hpp"
#include "depctl/serialize.hpp"
#include "depctl/tail_lab.hpp"

#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace depctl;
namespace fs = std::filesystem;

namespace {

struct Check {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// Criterion 1.
Check eigen_determinant() {
    RandomStream s(101, "acceptance/eigen");
    double worst_rel = 0.0, worst_res = 0.0;
    for (int i = 0; i < 500; ++i) {
        const std::size_t n = 1 + static_cast<std::size_t>(i % 16);
        const auto g = oracle::random_gaussian(n, n, s);
        const auto a = oracle::multiply(g, oracle::adjoint(g));
        const auto eig = eigen_hermitian(a);
        double prod = 1.0;
        for (double l : eig.eigenvalues) prod *= 1.0 + l;
        auto ia = a;
        for (std::size_t k = 0; k < n; ++k) ia(k, k) += 1.0;
        const double det = oracle::determinant(ia).real();
        worst_rel = std::max(worst_rel, std::abs(prod - det) / std::abs(det));
        worst_res = std::max(worst_res, eig.residual);
    }
    return {worst_rel <= 1e-9 && worst_res <= 1e-10,
            fmt("500 matrices 1..16: max rel det gap %.2e (<= 1e-9), max residual %.2e (<= 1e-10)", worst_rel,
                worst_res)};
}

// Criterion 2.
Check capacity_correctness() {
    RandomStream s(102, "acceptance/capacity");
    double worst_1x1 = 0.0;
    for (int i = 0; i < 200; ++i) {
        const cplx h(s.normal(), s.normal());
        CapacityParams p;
        p.rho = 0.1 + 20.0 * s.uniform();
        p.W = 0.5 + s.uniform();
        ComplexMatrix m(1, 1);
        m(0, 0) = h;
        const double want = p.W * std::log2(1.0 + p.rho * std::norm(h));
        worst_1x1 = std::max(worst_1x1, std::abs(capacity_flat(m, p).c - want));
    }
    // Real 3x3 channels: the oracle eigenvalues of H H^T come from the
    // closed form, the oracle capacity from a 1e-3 simplex grid.
    double worst_wf = 0.0;
    bool known_ge_unknown = true;
    for (int i = 0; i < 50; ++i) {
        ComplexMatrix h(3, 3);
        double r[3][3];
        for (std::size_t a = 0; a < 3; ++a)
            for (std::size_t b = 0; b < 3; ++b) h(a, b) = s.normal();
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                double acc = 0.0;
                for (int k = 0; k < 3; ++k) acc += h(a, k).real() * h(b, k).real();
                r[a][b] = acc;
            }
        const auto l = oracle::symmetric3_eigenvalues(r);
        CapacityParams p;
        p.rho = 1.0 + 9.0 * s.uniform();
        p.n_t = 3;
        p.csit = Csit::known;
        const double wf = capacity_flat(h, p).c;
        const double grid = oracle::grid_waterfill3(l, p.rho / 3.0, 3.0, 1e-3);
        worst_wf = std::max(worst_wf, std::abs(wf - grid));
        p.csit = Csit::unknown;
        known_ge_unknown = known_ge_unknown && wf >= capacity_flat(h, p).c - 1e-12;
    }
    for (int i = 0; i < 200; ++i) {
        const auto h = oracle::random_gaussian(4, 4, s);
        CapacityParams p;
        p.rho = 0.5 + 20.0 * s.uniform();
        p.n_t = 4;
        const double unknown = capacity_flat(h, p).c;
        p.csit = Csit::known;
        known_ge_unknown = known_ge_unknown && capacity_flat(h, p).c >= unknown - 1e-12;
    }
    return {worst_1x1 <= 1e-12 && worst_wf <= 1e-4 && known_ge_unknown,
            fmt("1x1 max error %.2e (<= 1e-12); waterfill vs grid max gap %.2e (<= 1e-4) on 50 3x3; known >= unknown: %s",
                worst_1x1, worst_wf, known_ge_unknown ? "yes" : "no")};
}

ChannelModel model(int n, const DistributionSpec& entry, bool normalize) {
    ChannelModel m;
    m.n_r = m.n_t = n;
    m.entry_law = entry;
    m.normalize = normalize;
    return m;
}

CapacityParams snr10(int n_t) {
    CapacityParams p;
    p.rho = 10.0;
    p.n_t = n_t;
    return p;
}

// Criterion 3.
Check light_tail_verdicts() {
    const std::vector<std::pair<const char*, DistributionSpec>> gains{
        {"rayleigh", DistributionSpec::rayleigh(1.0 / std::sqrt(2.0))},
        {"rice(K=3)", DistributionSpec::rice(3.0, 1.0)},
        {"nakagami(m=2)", DistributionSpec::nakagami(2.0, 1.0)},
        {"lognormal(0,1)", DistributionSpec::lognormal(0.0, 1.0)},
        {"weibull(0.8)", DistributionSpec::weibull(0.8, 1.0)},
    };
    int wrong = 0;
    std::string labels;
    for (const auto& [name, law] : gains) {
        const auto xs = sample_capacity(model(2, law, true), DistributionSpec::constant(1.0), snr10(2),
                                        RandomStream(103, std::string("acceptance/light/") + name), 1000000);
        std::vector<double> c(xs.size());
        std::transform(xs.begin(), xs.end(), c.begin(), [](const CapacitySample& x) { return x.c; });
        const auto v = light_tail_test(EmpiricalTail(std::move(c))).verdict;
        wrong += v != TailVerdict::light;
        labels += std::string(name) + "=" + to_string(v) + " ";
    }
    RandomStream ps(103, "acceptance/light/pareto");
    const auto v = light_tail_test(EmpiricalTail(sample(DistributionSpec::pareto1(2.0, 1.0), ps, 1000000))).verdict;
    wrong += v != TailVerdict::heavy;
    labels += "pareto(2)=" + to_string(v);
    return {wrong == 0, fmt("%d misclassified; %s", wrong, labels.c_str())};
}

// Criterion 4.
Check condition_dag() {
    struct Config {
        const char* name;
        ChannelModel m;
        DistributionSpec power;
    };
    const auto rayleigh = DistributionSpec::rayleigh(1.0 / std::sqrt(2.0));
    const std::vector<Config> configs{
        {"1x1 rayleigh, pareto(0.5)", model(1, rayleigh, false), DistributionSpec::pareto1(0.5, 1.0)},
        {"2x2 rayleigh, pareto(0.5)", model(2, rayleigh, false), DistributionSpec::pareto1(0.5, 1.0)},
        {"1x1 rayleigh, constant", model(1, rayleigh, false), DistributionSpec::constant(1.0)},
        {"2x2 rayleigh, constant", model(2, rayleigh, true), DistributionSpec::constant(1.0)},
        {"2x2 rayleigh, exponential", model(2, rayleigh, true), DistributionSpec::exponential(1.0)},
        {"1x1 rayleigh, pareto(2.5)", model(1, rayleigh, false), DistributionSpec::pareto1(2.5, 1.0)},
        {"2x2 rice(3), constant", model(2, DistributionSpec::rice(3.0, 1.0), true), DistributionSpec::constant(1.0)},
        {"1x1 nakagami(2), lognormal power", model(1, DistributionSpec::nakagami(2.0, 1.0), true),
         DistributionSpec::lognormal(0.0, 1.0)},
        {"1x1 lognormal gain, constant", model(1, DistributionSpec::lognormal(0.0, 1.0), true),
         DistributionSpec::constant(1.0)},
        {"2x2 weibull(0.8), pareto(1.5)", model(2, DistributionSpec::weibull(0.8, 1.0), true),
         DistributionSpec::pareto1(1.5, 1.0)},
        {"1x1 constant gain, constant", model(1, DistributionSpec::constant(1.0), false),
         DistributionSpec::constant(1.0)},
        {"1x1 rayleigh, uniform power", model(1, rayleigh, false), DistributionSpec::uniform(0.5, 1.5)},
    };
    std::size_t violated = 0;
    bool zero_divergent = true;
    std::string witness;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        const auto& c = configs[i];
        const auto r = condition_chain_eval(c.m, c.power, snr10(c.m.n_t),
                                            RandomStream(104, "acceptance/chain").substream(i), 100000);
        violated += r.violated.size();
        if (i == 0) {
            // E[(1 + p lambda)^theta] = infinity exactly for theta >= 0.5.
            const auto& row = r.rows[0];
            std::size_t flagged = 0, total = 0;
            for (std::size_t g = 0; g < row.theta.size(); ++g)
                if (row.theta[g] >= 0.5) {
                    ++total;
                    flagged += !row.finite[g];
                }
            zero_divergent = flagged == total && total > 0;
            witness = fmt("pareto(0.5) condition 0 divergent at %zu/%zu grid theta >= 0.5 (finite below: %s)",
                          flagged, total, row.finite_any ? "yes" : "no");
        }
    }
    return {violated == 0 && zero_divergent,
            fmt("%zu configs, %zu violated edges; %s", configs.size(), violated, witness.c_str())};
}

// Criterion 5.
Check product_sum() {
    const auto pe = product_tail_experiment(DistributionSpec::pareto1(2.0, 1.0), DistributionSpec::exponential(1.0),
                                            0.5, RandomStream(105, "acceptance/pe"), 1000000);
    const auto le = product_tail_experiment(DistributionSpec::logpareto(1.0, 1.0), DistributionSpec::exponential(1.0),
                                            0.5, RandomStream(105, "acceptance/le"), 1000000);
    const auto se = sum_tail_experiment(DistributionSpec::pareto1(2.0, 1.0), DistributionSpec::exponential(1.0),
                                        RandomStream(105, "acceptance/se"), 1000000);
    const bool ok = is_bounded(pe.curve.trend) && std::abs(pe.curve.asymptote - 2.0) <= 0.4 &&
                    le.curve.trend == Trend::unit && se.curve.trend == Trend::unit;
    return {ok, fmt("pareto*exp %s asymptote %.3f (2.0 +- 0.4); logpareto*exp %s asymptote %.3f [%.3f, %.3f]; "
                    "pareto+exp %s asymptote %.3f [%.3f, %.3f]",
                    to_string(pe.curve.trend).c_str(), pe.curve.asymptote, to_string(le.curve.trend).c_str(),
                    le.curve.asymptote, le.curve.asymptote_ci_lo, le.curve.asymptote_ci_hi,
                    to_string(se.curve.trend).c_str(), se.curve.asymptote, se.curve.asymptote_ci_lo,
                    se.curve.asymptote_ci_hi)};
}

// Criterion 6.
Check closure() {
    const auto r = comonotone_closure(DistributionSpec::pareto1(2.0, 1.0), 2, RandomStream(106, "acceptance/closure"),
                                      1000000);
    const bool ok = r.sum_agrees && r.product_agrees && r.sum.x_grid.size() == 10 && r.product.x_grid.size() == 10;
    return {ok, fmt("sum agrees: %s, product agrees: %s, %zu grid points", r.sum_agrees ? "yes" : "no",
                    r.product_agrees ? "yes" : "no", r.sum.x_grid.size())};
}

ProcessSpec uniform_path(const CopulaSpec& temporal) {
    ProcessSpec p;
    p.T = 8;
    p.coords = 1;
    p.marginals = {DistributionSpec::uniform(0.0, 1.0)};
    p.temporal = temporal;
    return p;
}

// Criterion 7.
Check sm_chain() {
    const std::vector<std::pair<const char*, std::pair<CopulaSpec, CopulaSpec>>> pairs{
        {"indep/comonotone", {CopulaSpec::independence(8), CopulaSpec::comonotone(8)}},
        {"gauss-0.8/gauss+0.8", {CopulaSpec::gaussian_ar1(-0.8, 8), CopulaSpec::gaussian_ar1(0.8, 8)}},
    };
    bool ok = true;
    std::string text;
    for (const auto& [name, cops] : pairs) {
        const auto pair = sm_pair(uniform_path(cops.first), uniform_path(cops.second));
        const RandomStream s(107, std::string("acceptance/sm/") + name);
        const auto fwd = partial_sum_order_experiment(pair, {}, s, 100000);
        const auto rev = partial_sum_order_experiment(SmPair{pair.hi, pair.lo, {}}, {}, s, 100000);
        const double mean_z = std::abs(fwd.lo.mean - fwd.hi.mean) /
                              std::sqrt(fwd.lo.mean_se * fwd.lo.mean_se + fwd.hi.mean_se * fwd.hi.mean_se);
        const bool good = fwd.verdict.outcome == depctl::Outcome::holds && mean_z <= 2.0 &&
                          rev.verdict.outcome == depctl::Outcome::fails;
        ok = ok && good;
        text += fmt("%s: forward %s (margin %.2f, mean gap %.2f se), reverse %s (margin %.1f); ", name,
                    to_string(fwd.verdict.outcome).c_str(), fwd.verdict.margin, mean_z,
                    to_string(rev.verdict.outcome).c_str(), rev.verdict.margin);
    }
    return {ok, text};
}

// Criterion 8.
Check dependence_bias() {
    ProcessSpec counter;
    counter.T = 1;
    counter.coords = 2;
    counter.marginals = {DistributionSpec::uniform(0.0, 1.0)};
    counter.spatial = CopulaSpec::countermonotone();
    ProcessSpec comon = counter;
    comon.spatial = CopulaSpec::comonotone(2);
    const auto a = dependence_bias_experiment(counter, default_delta_grid(), RandomStream(108, "acceptance/bias-c"),
                                              100000);
    const auto b = dependence_bias_experiment(comon, default_delta_grid(), RandomStream(108, "acceptance/bias-p"),
                                              100000);
    return {a.delta_star >= 0.05 && b.delta_star <= 0.005,
            fmt("countermonotone delta* = %.4f (needs >= 0.05); comonotone delta* = %.4f (needs <= 0.005)",
                a.delta_star, b.delta_star)};
}

// Criterion 9.
Check random_sums() {
    RandomSumConfig c;
    c.increments_lo = c.increments_hi = {DistributionSpec::exponential(1.0), DistributionSpec::exponential(1.0)};
    const auto r = random_sum_experiment(c, RandomStream(109, "acceptance/random-sum"), 1000000);
    bool all = true;
    std::string margins;
    for (const auto& w : r.witnesses) {
        all = all && w.outcome == depctl::Outcome::holds;
        margins += fmt(" %.2f", w.margin);
    }
    return {all && !r.witnesses.empty(),
            fmt("%zu witnesses, margins%s (hold at <= 2)", r.witnesses.size(), margins.c_str())};
}

// Criterion 10.
Check power_trade() {
    auto configs = [](const char* preset) {
        const Json p = preset_payload(ExperimentKind::queue, preset);
        return std::pair{queue_config_from_json(p.at("neg"), "neg"), queue_config_from_json(p.at("ref"), "ref")};
    };
    const auto [neg, ref] = configs("power-ar1-neg");
    const auto a = power_tradeoff(neg, ref, 0.99, 1e-3, RandomStream(110, "acceptance/power"));
    const auto [sym, sym_ref] = configs("power-symmetric");
    const auto b = power_tradeoff(sym, sym_ref, 0.99, 1e-3, RandomStream(110, "acceptance/power-sym"));
    const bool ok = !a.no_crossing && a.saving > 0.0 && a.ci_lo > 0.0 && b.ci_lo <= 0.0 && b.ci_hi >= 0.0;
    return {ok, fmt("AR1(-0.6) saving %.4f CI [%.4f, %.4f]; symmetric saving %.4f CI [%.4f, %.4f]", a.saving, a.ci_lo,
                    a.ci_hi, b.saving, b.ci_lo, b.ci_hi)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

// Criterion 11: every preset through the harness, twice.
Check determinism() {
    const fs::path root = fs::temp_directory_path() / "depctl-acceptance-determinism";
    fs::remove_all(root);
    const ExperimentKind kinds[] = {ExperimentKind::sample,      ExperimentKind::capacity, ExperimentKind::tail,
                                    ExperimentKind::product_sum, ExperimentKind::orders,   ExperimentKind::queue,
                                    ExperimentKind::condition_chain};
    std::vector<std::vector<RunManifest>> runs(2);
    for (int pass = 0; pass < 2; ++pass) {
        const fs::path dir = root / std::to_string(pass);
        fs::create_directories(dir);
        for (auto kind : kinds)
            for (const auto& name : preset_names(kind)) {
                ExperimentConfig c;
                c.name = kind_name(kind) + "-" + name;
                c.kind = kind;
                c.seed = 111;
                c.payload = Json{{"preset", name}};
                c.output_dir = dir.string();
                runs[pass].push_back(run(c));
            }
    }
    std::size_t files = 0, differing = 0, verdicts = 0;
    for (std::size_t i = 0; i < runs[0].size(); ++i) {
        const auto& m0 = runs[0][i];
        const auto& m1 = runs[1][i];
        verdicts += m0.verdict != m1.verdict || m0.config_hash != m1.config_hash;
        for (const auto& out : m0.outputs) {
            if (fs::path(out).extension() != ".csv" && fs::path(out).extension() != ".json") continue;
            ++files;
            differing += slurp(root / "0" / fs::path(out).filename()) != slurp(root / "1" / fs::path(out).filename());
        }
    }
    fs::remove_all(root);
    return {differing == 0 && verdicts == 0 && files > 0,
            fmt("%zu experiments, %zu output files compared, %zu differ, %zu verdict mismatches", runs[0].size(), files,
                differing, verdicts)};
}

struct Criterion {
    int id;
    const char* title;
    double budget_s;  // 0 when the criterion sets no runtime bound
    std::function<Check()> check;
};

} // namespace

int main(int argc, char** argv) {
    std::set<int> expect_fail, only;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if ((a == "--expect-fail" || a == "--only") && i + 1 < argc) {
            (a == "--only" ? only : expect_fail).insert(std::atoi(argv[++i]));
        } else {
            std::fprintf(stderr, "usage: %s [--expect-fail N]... [--only N]...\n", argv[0]);
            return 1;
        }
    }

    const std::vector<Criterion> criteria{
        {1, "eigen/determinant identity", 10, eigen_determinant},
        {2, "capacity correctness", 60, capacity_correctness},
        {3, "light-tail verdicts", 300, light_tail_verdicts},
        {4, "condition DAG", 300, condition_dag},
        {5, "product and sum tails", 300, product_sum},
        {6, "comonotone closure", 0, closure},
        {7, "sm -> cx chain", 120, sm_chain},
        {8, "dependence bias", 0, dependence_bias},
        {9, "random sums", 0, random_sums},
        {10, "power trade", 600, power_trade},
        {11, "determinism", 0, determinism},
    };

    int passed = 0, run_count = 0;
    std::vector<int> unexpected;
    for (const auto& c : criteria) {
        if (!only.empty() && !only.count(c.id)) continue;
        ++run_count;
        const auto t0 = std::chrono::steady_clock::now();
        Check o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.budget_s > 0 && secs >= c.budget_s) {
            o.pass = false;
            o.detail += fmt("; over the %.0f s budget", c.budget_s);
        }
        std::printf("%s %2d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.title, o.detail.c_str(), secs);
        std::fflush(stdout);
        passed += o.pass;
        if (o.pass == expect_fail.count(c.id) > 0) unexpected.push_back(c.id);
    }
    std::printf("acceptance: %d/%d passed", passed, run_count);
    if (!expect_fail.empty()) {
        std::printf("; expected failures:");
        for (int id : expect_fail) std::printf(" %d", id);
    }
    if (!unexpected.empty()) {
        std::printf("; unexpected results:");
        for (int id : unexpected) std::printf(" %d", id);
    }
    std::printf("\n");
    return unexpected.empty() ? 0 : 1;
}
