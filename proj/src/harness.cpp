#include "depctl/harness.hpp"

#include "depctl/errors.hpp"
#include "depctl/numeric.hpp"
#include "depctl/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace depctl {

using namespace schema;

namespace fs = std::filesystem;

namespace {

constexpr std::array<std::pair<ExperimentKind, const char*>, 7> kKinds{{
    {ExperimentKind::sample, "sample"},
    {ExperimentKind::capacity, "capacity"},
    {ExperimentKind::tail, "tail"},
    {ExperimentKind::product_sum, "product_sum"},
    {ExperimentKind::orders, "orders"},
    {ExperimentKind::queue, "queue"},
    {ExperimentKind::condition_chain, "condition_chain"},
}};

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    if (!out) throw Error("write failed: " + path.string());
}

std::string string_or(const Json& j, const std::string& key, const std::string& fallback, const std::string& field) {
    return j.contains(key) ? string_at(j, key, field) : fallback;
}

std::size_t at_least(std::size_t v, std::size_t lo, const std::string& field) {
    if (v < lo) throw SchemaError(field + ": must be at least " + std::to_string(lo));
    return v;
}

Trend trend_from_name(const std::string& s, const std::string& field) {
    for (Trend t : {Trend::bounded, Trend::vanishing, Trend::diverging, Trend::unit})
        if (to_string(t) == s) return t;
    throw SchemaError(field + ": unknown trend '" + s + "'");
}

std::string verdict_of(Outcome o) { return to_string(o); }

double outcome_code(Outcome o) {
    switch (o) {
    case Outcome::holds: return 0.0;
    case Outcome::fails: return 1.0;
    case Outcome::inconclusive: return 2.0;
    }
    return 2.0;
}

std::vector<DistributionSpec> distribution_list(const Json& j, const std::string& field) {
    if (!j.is_array()) throw SchemaError(field + ": expected an array");
    std::vector<DistributionSpec> out;
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(distribution_from_json(j[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<double> number_list(const Json& j, const std::string& field) {
    if (!j.is_array()) throw SchemaError(field + ": expected an array");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(to_double(j[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

/// What a runner hands back to `run`.
struct Outcomes {
    Json report;
    std::string verdict = "completed";
    std::string key_statistic;
    double value = 0.0;
    std::optional<double> ci_lo;
    std::optional<double> ci_hi;
};

struct Context {
    const Json& payload;
    const RandomStream& stream;
    fs::path csv;
    std::string field = "payload";
};

void mean_with_ci(Outcomes& o, const std::vector<double>& xs) {
    const double m = mean(xs);
    const double se = xs.size() > 1 ? standard_error_of_mean(xs) : 0.0;
    o.value = m;
    o.ci_lo = m - 1.959963984540054 * se;
    o.ci_hi = m + 1.959963984540054 * se;
}

Outcomes run_sample(const Context& c) {
    const auto& p = c.payload;
    reject_unknown(p, c.field, {"dist", "n"});
    const auto dist = distribution_from_json(member(p, "dist", c.field), c.field + ".dist");
    const auto n = at_least(count_at(p, "n", c.field), 1, c.field + ".n");
    const auto xs = sample_chunked(dist, c.stream, n);
    {
        CsvWriter csv(c.csv.string(), {"index", "value"});
        for (std::size_t i = 0; i < xs.size(); ++i) csv.row({static_cast<double>(i), xs[i]});
    }
    Outcomes o;
    o.key_statistic = "mean";
    mean_with_ci(o, xs);
    o.report = Json{{"dist", to_json(dist)}, {"n", n}, {"mean", number(o.value)}};
    return o;
}

struct CapacityInputs {
    ChannelModel model;
    DistributionSpec power;
    CapacityParams params;
};

CapacityInputs capacity_inputs(const Json& p, const std::string& field) {
    return CapacityInputs{channel_model_from_json(member(p, "model", field), field + ".model"),
                          p.contains("power") ? distribution_from_json(p.at("power"), field + ".power")
                                              : DistributionSpec::constant(1.0),
                          capacity_params_from_json(member(p, "params", field), field + ".params")};
}

Json to_json(const CapacityInputs& in) {
    return Json{{"model", to_json(in.model)}, {"power", to_json(in.power)}, {"params", to_json(in.params)}};
}

Outcomes run_capacity(const Context& c) {
    const auto& p = c.payload;
    reject_unknown(p, c.field, {"model", "power", "params", "n"});
    const auto in = capacity_inputs(p, c.field);
    const auto n = at_least(count_at(p, "n", c.field), 1, c.field + ".n");
    const auto samples = sample_capacity(in.model, in.power, in.params, c.stream, n);
    std::vector<double> cs;
    cs.reserve(n);
    {
        CsvWriter csv(c.csv.string(), {"index", "c_bits_per_s", "lambda_max", "trace", "power"});
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const auto& s = samples[i];
            csv.row({static_cast<double>(i), s.c, s.lambda_max, s.trace, s.power});
            cs.push_back(s.c);
        }
    }
    Outcomes o;
    o.key_statistic = "mean_capacity";
    mean_with_ci(o, cs);
    o.report = to_json(in);
    o.report["n"] = n;
    o.report["mean_capacity"] = number(o.value);
    return o;
}

Outcomes run_tail(const Context& c) {
    const auto& p = c.payload;
    reject_unknown(p, c.field, {"dist", "capacity", "n", "expect"});
    const auto n = at_least(count_at(p, "n", c.field), 1000, c.field + ".n");
    Json source;
    std::vector<double> xs;
    if (p.contains("dist") == p.contains("capacity"))
        throw SchemaError(c.field + ": exactly one of dist and capacity is required");
    if (p.contains("dist")) {
        const auto dist = distribution_from_json(p.at("dist"), c.field + ".dist");
        source = Json{{"dist", to_json(dist)}};
        xs = sample_chunked(dist, c.stream, n);
    } else {
        const std::string f = c.field + ".capacity";
        const Json& cap = p.at("capacity");
        require_object(cap, f);
        reject_unknown(cap, f, {"model", "power", "params"});
        const auto in = capacity_inputs(cap, f);
        source = Json{{"capacity", to_json(in)}};
        for (const auto& s : sample_capacity(in.model, in.power, in.params, c.stream, n)) xs.push_back(s.c);
    }
    const EmpiricalTail tail(std::move(xs));
    const auto light = light_tail_test(tail);
    const std::size_t k = std::clamp<std::size_t>(n / 100, 10, 1000);
    const double hill_index = hill(tail, k);
    const auto probe = mgf_probe(tail, default_theta_grid());
    {
        CsvWriter csv(c.csv.string(), {"theta", "log_estimate", "stable"});
        for (std::size_t i = 0; i < probe.theta_grid.size(); ++i)
            csv.row({probe.theta_grid[i], probe.checks[i].log_estimate, probe.stable[i] ? 1.0 : 0.0});
    }
    Outcomes o;
    o.key_statistic = "hill_index";
    o.value = hill_index;
    if (p.contains("expect")) {
        const auto expect = string_at(p, "expect", c.field);
        if (expect != "light" && expect != "heavy")
            throw SchemaError(c.field + ".expect: expected \"light\" or \"heavy\"");
        o.verdict = light.verdict == TailVerdict::inconclusive ? "inconclusive"
                    : to_string(light.verdict) == expect     ? "holds"
                                                              : "fails";
    }
    Json stable = Json::array();
    for (bool b : probe.stable) stable.push_back(b);
    o.report = source;
    o.report["n"] = n;
    o.report["light_tail"] = to_json(light);
    o.report["hill"] = Json{{"k", k}, {"index", number(hill_index)}};
    Json logs = Json::array();
    for (const auto& chk : probe.checks) logs.push_back(number(chk.log_estimate));
    o.report["mgf"] = Json{{"theta", probe.theta_grid}, {"log_estimate", logs}, {"stable", stable}};
    return o;
}

void write_curve_rows(CsvWriter& csv, double id, const RatioCurve& curve) {
    for (std::size_t i = 0; i < curve.x_grid.size(); ++i)
        csv.row({id, curve.x_grid[i], curve.ratio[i], curve.ci_lo[i], curve.ci_hi[i],
                 static_cast<double>(curve.exceedances[i])});
}

Outcomes run_product_sum(const Context& c) {
    const auto& p = c.payload;
    reject_unknown(p, c.field, {"operation", "spec1", "spec2", "phi_alpha", "n", "expect", "copies"});
    const auto op = string_at(p, "operation", c.field);
    const auto n = at_least(count_at(p, "n", c.field), 1000, c.field + ".n");
    const auto spec1 = distribution_from_json(member(p, "spec1", c.field), c.field + ".spec1");
    const std::vector<std::string> header{"curve", "x", "ratio", "ci_lo", "ci_hi", "exceedances"};
    Outcomes o;
    if (op == "comonotone_closure") {
        const auto copies = count_or(p, "copies", 2, c.field);
        const auto rep = comonotone_closure(spec1, static_cast<int>(copies), c.stream, n);
        {
            CsvWriter csv(c.csv.string(), header);
            write_curve_rows(csv, 0.0, rep.sum);
            write_curve_rows(csv, 1.0, rep.product);
        }
        o.report = to_json(rep);
        o.verdict = rep.sum_agrees && rep.product_agrees ? "holds" : "fails";
        o.key_statistic = "sum_asymptote";
        o.value = rep.sum.asymptote;
        o.ci_lo = rep.sum.asymptote_ci_lo;
        o.ci_hi = rep.sum.asymptote_ci_hi;
        return o;
    }
    if (op != "product" && op != "sum")
        throw SchemaError(c.field + ".operation: expected product, sum or comonotone_closure");
    const auto spec2 = distribution_from_json(member(p, "spec2", c.field), c.field + ".spec2");
    const double phi = number_or(p, "phi_alpha", 0.5, c.field);
    const auto rep = op == "product" ? product_tail_experiment(spec1, spec2, phi, c.stream, n)
                                     : sum_tail_experiment(spec1, spec2, c.stream, n, phi);
    {
        CsvWriter csv(c.csv.string(), header);
        write_curve_rows(csv, 0.0, rep.curve);
    }
    o.report = to_json(rep);
    o.key_statistic = "asymptote";
    o.value = rep.curve.asymptote;
    o.ci_lo = rep.curve.asymptote_ci_lo;
    o.ci_hi = rep.curve.asymptote_ci_hi;
    if (p.contains("expect")) {
        const auto expect = trend_from_name(string_at(p, "expect", c.field), c.field + ".expect");
        const bool match = expect == Trend::bounded ? is_bounded(rep.curve.trend) : rep.curve.trend == expect;
        o.verdict = match ? "holds" : "fails";
        o.report["expect"] = to_string(expect);
    }
    return o;
}

Outcomes run_orders(const Context& c) {
    const auto& p = c.payload;
    const auto experiment = string_at(p, "experiment", c.field);
    const auto& f = c.field;
    Outcomes o;
    if (experiment == "partial_sum") {
        reject_unknown(p, f, {"experiment", "lo", "hi", "weights", "paths", "direction"});
        const auto lo = process_from_json(member(p, "lo", f), f + ".lo");
        const auto hi = process_from_json(member(p, "hi", f), f + ".hi");
        const auto weights = p.contains("weights") ? number_list(p.at("weights"), f + ".weights") : std::vector<double>{};
        const auto paths = count_at(p, "paths", f);
        const auto direction = string_or(p, "direction", "forward", f);
        if (direction != "forward" && direction != "reverse")
            throw SchemaError(f + ".direction: expected forward or reverse");
        auto pair = sm_pair(lo, hi);
        if (direction == "reverse") pair = SmPair{pair.hi, pair.lo, {"reversed: hi tested below lo"}};
        const auto rep = partial_sum_order_experiment(pair, weights, c.stream, paths);
        {
            CsvWriter csv(c.csv.string(), {"t", "pi_lo", "se_lo", "pi_hi", "se_hi", "z"});
            for (std::size_t i = 0; i < rep.lo.t_grid.size(); ++i)
                csv.row({rep.lo.t_grid[i], rep.lo.pi[i], rep.lo.se[i], rep.hi.pi[i], rep.hi.se[i], rep.verdict.z[i]});
        }
        o.report = to_json(rep);
        o.report["direction"] = direction;
        o.verdict = verdict_of(rep.verdict.outcome);
        o.key_statistic = "margin";
        o.value = rep.verdict.margin;
    } else if (experiment == "bias") {
        reject_unknown(p, f, {"experiment", "process", "deltas", "paths"});
        const auto proc = process_from_json(member(p, "process", f), f + ".process");
        const auto deltas = p.contains("deltas") ? number_list(p.at("deltas"), f + ".deltas") : default_delta_grid();
        const auto rep = dependence_bias_experiment(proc, deltas, c.stream, count_at(p, "paths", f));
        {
            CsvWriter csv(c.csv.string(), {"delta", "margin", "outcome"});
            for (std::size_t i = 0; i < rep.delta.size(); ++i)
                csv.row({rep.delta[i], rep.verdicts[i].margin, outcome_code(rep.verdicts[i].outcome)});
        }
        o.report = to_json(rep);
        o.verdict = verdict_of(rep.outcome);
        o.key_statistic = "delta_star";
        o.value = rep.delta_star;
    } else if (experiment == "random_sum") {
        reject_unknown(p, f,
                       {"experiment", "count_law", "counts_lo", "counts_hi", "increments_lo", "increments_hi", "n",
                        "increments_depend_on_counts"});
        RandomSumConfig cfg;
        cfg.increments_lo = distribution_list(member(p, "increments_lo", f), f + ".increments_lo");
        cfg.increments_hi = distribution_list(member(p, "increments_hi", f), f + ".increments_hi");
        const std::size_t d = cfg.increments_lo.size();
        cfg.count_law = distribution_from_json(member(p, "count_law", f), f + ".count_law");
        cfg.counts_lo = copula_from_json(member(p, "counts_lo", f), d, f + ".counts_lo");
        cfg.counts_hi = copula_from_json(member(p, "counts_hi", f), d, f + ".counts_hi");
        cfg.increments_depend_on_counts = bool_or(p, "increments_depend_on_counts", false, f);
        const auto rep = random_sum_experiment(cfg, c.stream, count_at(p, "n", f));
        {
            CsvWriter csv(c.csv.string(), {"witness", "margin", "outcome"});
            for (std::size_t i = 0; i < rep.witnesses.size(); ++i)
                csv.row({static_cast<double>(i), rep.witnesses[i].margin, outcome_code(rep.witnesses[i].outcome)});
        }
        o.report = to_json(rep);
        o.verdict = verdict_of(rep.verdict.outcome);
        o.key_statistic = "margin";
        o.value = rep.verdict.margin;
    } else if (experiment == "strength") {
        reject_unknown(p, f, {"experiment", "base", "modified", "paths"});
        const auto base = process_from_json(member(p, "base", f), f + ".base");
        const auto modified = distribution_list(member(p, "modified", f), f + ".modified");
        const auto rep = marginal_strength_experiment(base, modified, c.stream, count_at(p, "paths", f));
        double worst = 0.0;
        bool any_fail = false;
        {
            CsvWriter csv(c.csv.string(), {"k_lo", "k_hi", "margin", "outcome"});
            for (std::size_t i = 0; i < rep.verdicts.size(); ++i) {
                const auto& v = rep.verdicts[i];
                csv.row({static_cast<double>(rep.k_lo[i]), static_cast<double>(rep.k_hi[i]), v.margin,
                         outcome_code(v.outcome)});
                worst = std::max(worst, v.margin);
                any_fail = any_fail || v.outcome == Outcome::fails;
            }
        }
        o.report = to_json(rep);
        o.verdict = rep.all_hold ? "holds" : (any_fail ? "fails" : "inconclusive");
        o.key_statistic = "worst_margin";
        o.value = worst;
    } else {
        throw SchemaError(f + ".experiment: expected partial_sum, bias, random_sum or strength");
    }
    return o;
}

Outcomes run_queue(const Context& c) {
    const auto& p = c.payload;
    const auto& f = c.field;
    const auto experiment = string_at(p, "experiment", f);
    Outcomes o;
    if (experiment == "backlog") {
        reject_unknown(p, f, {"experiment", "config"});
        const auto cfg = queue_config_from_json(member(p, "config", f), f + ".config");
        const auto st = backlog_stats(cfg, c.stream);
        {
            CsvWriter csv(c.csv.string(), {"x", "p", "ci_lo", "ci_hi"});
            for (std::size_t i = 0; i < st.x_grid.size(); ++i)
                csv.row({st.x_grid[i], st.exceedance[i], st.exceedance_lo[i], st.exceedance_hi[i]});
        }
        o.report = to_json(st);
        o.verdict = st.unstable || st.nonstationary ? "inconclusive" : "completed";
        o.key_statistic = "mean_backlog";
        o.value = st.mean;
        o.ci_lo = st.mean - 1.959963984540054 * st.mean_se;
        o.ci_hi = st.mean + 1.959963984540054 * st.mean_se;
    } else if (experiment == "power_tradeoff") {
        reject_unknown(p, f, {"experiment", "neg", "ref", "q", "tolerance", "claim", "batches"});
        const auto neg = queue_config_from_json(member(p, "neg", f), f + ".neg");
        const auto ref = queue_config_from_json(member(p, "ref", f), f + ".ref");
        const double q = number_or(p, "q", 0.99, f);
        const double tol = number_or(p, "tolerance", 1e-3, f);
        const auto batches = count_or(p, "batches", 10, f);
        const auto claim = string_or(p, "claim", "positive", f);
        if (claim != "positive" && claim != "zero" && claim != "negative")
            throw SchemaError(f + ".claim: expected positive, zero or negative");
        const auto rep = power_tradeoff(neg, ref, q, tol, c.stream, Exec::parallel, batches);
        {
            CsvWriter csv(c.csv.string(), {"batch", "saving"});
            for (std::size_t i = 0; i < rep.batch_savings.size(); ++i)
                csv.row({static_cast<double>(i), rep.batch_savings[i]});
        }
        o.report = to_json(rep);
        o.report["claim"] = claim;
        bool holds = false;
        if (claim == "positive") holds = !rep.no_crossing && rep.ci_lo > 0.0;
        if (claim == "zero") holds = !rep.no_crossing && rep.ci_lo <= 0.0 && 0.0 <= rep.ci_hi;
        if (claim == "negative") holds = rep.no_crossing || rep.ci_hi < 0.0;
        o.verdict = holds ? "holds" : "fails";
        o.key_statistic = "saving";
        o.value = rep.saving;
        o.ci_lo = rep.ci_lo;
        o.ci_hi = rep.ci_hi;
    } else {
        throw SchemaError(f + ".experiment: expected backlog or power_tradeoff");
    }
    return o;
}

Outcomes run_chain(const Context& c) {
    const auto& p = c.payload;
    reject_unknown(p, c.field, {"model", "power", "params", "n", "theta"});
    const auto in = capacity_inputs(p, c.field);
    const auto n = at_least(count_at(p, "n", c.field), 1000, c.field + ".n");
    const auto theta = p.contains("theta") ? number_list(p.at("theta"), c.field + ".theta") : default_theta_grid();
    const auto batch = sample_capacity_batch(in.model, in.power, in.params, c.stream, n);
    const auto rep = evaluate_conditions(batch, theta);
    {
        CsvWriter csv(c.csv.string(), {"condition", "theta", "log_estimate", "finite"});
        for (const auto& row : rep.rows)
            for (std::size_t i = 0; i < row.theta.size(); ++i)
                csv.row({static_cast<double>(row.id), row.theta[i], row.checks[i].log_estimate,
                         row.finite[i] ? 1.0 : 0.0});
    }
    Outcomes o;
    o.report = to_json(rep);
    o.report["inputs"] = to_json(in);
    o.verdict = rep.dag_consistent ? "holds" : "fails";
    o.key_statistic = "violated_edges";
    o.value = static_cast<double>(rep.violated.size());
    return o;
}

} // namespace

std::string kind_name(ExperimentKind k) {
    for (const auto& [kind, name] : kKinds)
        if (kind == k) return name;
    throw ContractError("unknown experiment kind");
}

ExperimentKind experiment_kind_from_name(const std::string& name) {
    if (name == "product-sum") return ExperimentKind::product_sum;
    if (name == "chain") return ExperimentKind::condition_chain;
    for (const auto& [kind, n] : kKinds)
        if (name == n) return kind;
    throw SchemaError("kind: unknown experiment kind '" + name + "'");
}

ExperimentConfig config_from_json(const Json& j) {
    require_object(j, "config");
    reject_unknown(j, "config", {"name", "kind", "seed", "payload", "output_dir"});
    ExperimentConfig c;
    c.name = string_at(j, "name", "config");
    if (c.name.empty() || c.name.find('/') != std::string::npos)
        throw SchemaError("config.name: must be a nonempty file-name-safe string");
    c.kind = experiment_kind_from_name(string_at(j, "kind", "config"));
    const Json& seed = member(j, "seed", "config");
    if (!seed.is_number_unsigned()) throw SchemaError("config.seed: expected a nonnegative 64-bit integer");
    c.seed = seed.get<std::uint64_t>();
    c.payload = j.contains("payload") ? j.at("payload") : Json::object();
    require_object(c.payload, "config.payload");
    if (j.contains("output_dir")) c.output_dir = string_at(j, "output_dir", "config");
    return c;
}

Json to_json(const ExperimentConfig& c) {
    return Json{{"name", c.name}, {"kind", kind_name(c.kind)}, {"seed", c.seed}, {"payload", c.payload},
                {"output_dir", c.output_dir}};
}

Json resolve_payload(const ExperimentConfig& config) {
    if (!config.payload.contains("preset")) return config.payload;
    const Json& name = config.payload.at("preset");
    if (!name.is_string()) throw SchemaError("config.payload.preset: expected a string");
    Json merged = preset_payload(config.kind, name.get<std::string>());
    for (const auto& [key, value] : config.payload.items())
        if (key != "preset") merged[key] = value;
    return merged;
}

std::string config_hash(const ExperimentConfig& config) {
    const Json canonical{{"name", config.name}, {"kind", kind_name(config.kind)}, {"seed", config.seed},
                         {"payload", resolve_payload(config)}};
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(canonical.dump());
    return os.str();
}

Json to_json(const RunManifest& m) {
    Json j{{"name", m.name},         {"kind", m.kind},       {"config_hash", m.config_hash},
           {"version", m.version},   {"seed", m.seed},       {"threads", m.threads},
           {"started", m.started},   {"finished", m.finished}, {"outputs", m.outputs},
           {"verdict", m.verdict},   {"key_statistic", m.key_statistic}, {"value", number(m.value)}};
    j["ci"] = m.ci_lo && m.ci_hi ? Json{number(*m.ci_lo), number(*m.ci_hi)} : Json(nullptr);
    return j;
}

RunManifest manifest_from_json(const Json& j) {
    const std::string f = "manifest";
    require_object(j, f);
    RunManifest m;
    m.name = string_at(j, "name", f);
    m.kind = string_at(j, "kind", f);
    m.config_hash = string_at(j, "config_hash", f);
    m.version = string_at(j, "version", f);
    m.seed = member(j, "seed", f).get<std::uint64_t>();
    m.threads = static_cast<int>(count_at(j, "threads", f));
    m.started = string_at(j, "started", f);
    m.finished = string_at(j, "finished", f);
    const Json& outs = member(j, "outputs", f);
    if (!outs.is_array()) throw SchemaError(f + ".outputs: expected an array");
    for (const auto& o : outs) m.outputs.push_back(o.get<std::string>());
    m.verdict = string_at(j, "verdict", f);
    m.key_statistic = string_at(j, "key_statistic", f);
    m.value = number_at(j, "value", f);
    if (j.contains("ci") && !j.at("ci").is_null()) {
        const Json& ci = j.at("ci");
        if (!ci.is_array() || ci.size() != 2) throw SchemaError(f + ".ci: expected [lo, hi] or null");
        m.ci_lo = to_double(ci[0], f + ".ci[0]");
        m.ci_hi = to_double(ci[1], f + ".ci[1]");
    }
    return m;
}

RunManifest run(const ExperimentConfig& config) {
    RunManifest m;
    m.name = config.name;
    m.kind = kind_name(config.kind);
    m.config_hash = config_hash(config);
    m.version = DEPCTL_VERSION;
    m.seed = config.seed;
    m.threads = worker_threads();
    m.started = utc_now();

    const fs::path dir(config.output_dir);
    fs::create_directories(dir);
    const Json payload = resolve_payload(config);
    const RandomStream stream(config.seed, "experiment/" + m.kind);
    const std::string csv_name = config.name + ".csv";
    const Context ctx{payload, stream, dir / csv_name};
    require_object(payload, ctx.field);

    Outcomes o;
    switch (config.kind) {
    case ExperimentKind::sample: o = run_sample(ctx); break;
    case ExperimentKind::capacity: o = run_capacity(ctx); break;
    case ExperimentKind::tail: o = run_tail(ctx); break;
    case ExperimentKind::product_sum: o = run_product_sum(ctx); break;
    case ExperimentKind::orders: o = run_orders(ctx); break;
    case ExperimentKind::queue: o = run_queue(ctx); break;
    case ExperimentKind::condition_chain: o = run_chain(ctx); break;
    }

    Json report{{"name", config.name}, {"kind", m.kind}, {"config_hash", m.config_hash}, {"seed", config.seed},
                {"verdict", o.verdict}, {"result", o.report}};
    const std::string json_name = config.name + ".json";
    write_text(dir / json_name, report.dump(2) + "\n");

    m.outputs = {json_name, csv_name};
    m.verdict = o.verdict;
    m.key_statistic = o.key_statistic;
    m.value = o.value;
    m.ci_lo = o.ci_lo;
    m.ci_hi = o.ci_hi;
    m.finished = utc_now();
    write_text(dir / (config.name + ".manifest.json"), to_json(m).dump(2) + "\n");
    return m;
}

int exit_code(const RunManifest& m) { return m.verdict == "holds" || m.verdict == "completed" ? 0 : 2; }

std::vector<ReportRow> report(const std::vector<std::string>& manifest_paths) {
    std::vector<ReportRow> rows;
    for (const auto& path : manifest_paths) {
        std::ifstream in(path);
        if (!in) throw Error("manifest " + path + ": cannot open");
        Json j;
        try {
            j = Json::parse(in);
        } catch (const Json::parse_error& e) {
            throw SchemaError("manifest " + path + ": " + e.what());
        }
        const auto m = manifest_from_json(j);
        const fs::path dir = fs::path(path).parent_path();
        for (const auto& out : m.outputs)
            if (!fs::exists(dir / out)) throw Error("manifest " + path + ": missing output " + out);
        rows.push_back(ReportRow{m.name, m.kind, m.verdict, m.key_statistic, m.value, m.ci_lo, m.ci_hi});
    }
    std::stable_sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) { return a.name < b.name; });
    return rows;
}

std::string format_report(const std::vector<ReportRow>& rows) {
    const std::vector<std::string> header{"name", "kind", "verdict", "key_statistic", "value", "ci_lo", "ci_hi"};
    std::vector<std::vector<std::string>> cells{header};
    for (const auto& r : rows)
        cells.push_back({r.name, r.kind, r.verdict, r.key_statistic, format_number(r.value),
                         r.ci_lo ? format_number(*r.ci_lo) : "-", r.ci_hi ? format_number(*r.ci_hi) : "-"});
    std::vector<std::size_t> width(header.size(), 0);
    for (const auto& row : cells)
        for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
    std::ostringstream os;
    for (const auto& row : cells) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            os << row[i];
            if (i + 1 < row.size()) os << std::string(width[i] - row[i].size() + 2, ' ');
        }
        os << '\n';
    }
    return os.str();
}

void write_report_csv(const std::vector<ReportRow>& rows, const std::string& path) {
    std::ostringstream os;
    os << "name,kind,verdict,key_statistic,value,ci_lo,ci_hi\n";
    for (const auto& r : rows)
        os << r.name << ',' << r.kind << ',' << r.verdict << ',' << r.key_statistic << ',' << format_number(r.value)
           << ',' << (r.ci_lo ? format_number(*r.ci_lo) : "") << ',' << (r.ci_hi ? format_number(*r.ci_hi) : "")
           << '\n';
    write_text(path, os.str());
}

} // namespace depctl
