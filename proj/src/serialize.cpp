#include "depctl/serialize.hpp"

#include "depctl/errors.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <set>

namespace depctl {

namespace {

struct FamilyFields {
    Family family;
    const char* p1;
    const char* p2;  // nullptr for one-parameter families
};

constexpr std::array<FamilyFields, 11> kFamilyFields{{
    {Family::rayleigh, "sigma", nullptr},
    {Family::rice, "K", "omega"},
    {Family::nakagami, "m", "omega"},
    {Family::lognormal, "mu", "sigma"},
    {Family::weibull, "k", "lambda"},
    {Family::pareto1, "alpha", "xm"},
    {Family::exponential, "rate", nullptr},
    {Family::logpareto, "alpha", "xm"},
    {Family::constant, "value", nullptr},
    {Family::uniform, "a", "b"},
    {Family::poisson, "mean", nullptr},
}};

const FamilyFields& fields_of(Family f) {
    for (const auto& ff : kFamilyFields)
        if (ff.family == f) return ff;
    throw ContractError("unknown family");
}

} // namespace

namespace schema {

void require_object(const Json& j, const std::string& field) {
    if (!j.is_object()) throw SchemaError(field + ": expected an object");
}

void reject_unknown(const Json& j, const std::string& field, std::initializer_list<const char*> allowed) {
    std::set<std::string> ok;
    for (const char* a : allowed)
        if (a) ok.insert(a);
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!ok.count(key)) throw SchemaError(field + "." + key + ": unknown field");
    }
}

const Json& member(const Json& j, const std::string& key, const std::string& field) {
    auto it = j.find(key);
    if (it == j.end()) throw SchemaError(field + "." + key + ": missing required field");
    return *it;
}

double number_at(const Json& j, const std::string& key, const std::string& field) {
    return to_double(member(j, key, field), field + "." + key);
}

double number_or(const Json& j, const std::string& key, double fallback, const std::string& field) {
    return j.contains(key) ? to_double(j.at(key), field + "." + key) : fallback;
}

std::size_t count_at(const Json& j, const std::string& key, const std::string& field) {
    const Json& v = member(j, key, field);
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw SchemaError(field + "." + key + ": expected a nonnegative integer");
    return v.get<std::size_t>();
}

std::size_t count_or(const Json& j, const std::string& key, std::size_t fallback, const std::string& field) {
    return j.contains(key) ? count_at(j, key, field) : fallback;
}

bool bool_or(const Json& j, const std::string& key, bool fallback, const std::string& field) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_boolean()) throw SchemaError(field + "." + key + ": expected a boolean");
    return j.at(key).get<bool>();
}

std::string string_at(const Json& j, const std::string& key, const std::string& field) {
    const Json& v = member(j, key, field);
    if (!v.is_string()) throw SchemaError(field + "." + key + ": expected a string");
    return v.get<std::string>();
}

} // namespace schema

using namespace schema;

namespace {

Json numbers(const std::vector<double>& xs) {
    Json a = Json::array();
    for (double x : xs) a.push_back(number(x));
    return a;
}

template <class Wrap>
Json wrap_validation(const std::string& field, Wrap&& body) {
    try {
        return body();
    } catch (const ParameterError& e) {
        throw SchemaError(field + ": " + e.what());
    }
}

} // namespace

Json number(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

double to_double(const Json& j, const std::string& field) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    throw SchemaError(field + ": expected a number");
}

Json to_json(const DistributionSpec& spec) {
    const auto& ff = fields_of(spec.family);
    Json j{{"family", family_name(spec.family)}, {ff.p1, number(spec.p1)}};
    if (ff.p2) j[ff.p2] = number(spec.p2);
    if (spec.shift != 0.0) j["shift"] = number(spec.shift);
    if (spec.scale != 1.0) j["scale"] = number(spec.scale);
    return j;
}

DistributionSpec distribution_from_json(const Json& j, const std::string& field) {
    require_object(j, field);
    DistributionSpec s;
    const std::string family = string_at(j, "family", field);
    try {
        s.family = family_from_name(family);
    } catch (const SchemaError&) {
        throw SchemaError(field + ".family: unknown family '" + family + "'");
    }
    const auto& ff = fields_of(s.family);
    reject_unknown(j, field, {"family", ff.p1, ff.p2, "shift", "scale"});
    s.p1 = number_at(j, ff.p1, field);
    if (ff.p2) s.p2 = number_at(j, ff.p2, field);
    s.shift = number_or(j, "shift", 0.0, field);
    s.scale = number_or(j, "scale", 1.0, field);
    wrap_validation(field, [&] {
        validate(s);
        return Json();
    });
    return s;
}

Json to_json(const CopulaSpec& spec) {
    Json j{{"kind", kind_name(spec.kind)}, {"dim", spec.dim}};
    if (spec.kind == CopulaKind::gaussian_exchangeable || spec.kind == CopulaKind::gaussian_ar1)
        j["rho"] = number(spec.param);
    if (spec.kind == CopulaKind::clayton) j["theta"] = number(spec.param);
    return j;
}

CopulaSpec copula_from_json(const Json& j, std::size_t default_dim, const std::string& field) {
    require_object(j, field);
    CopulaSpec c;
    const std::string kind = string_at(j, "kind", field);
    try {
        c.kind = copula_kind_from_name(kind);
    } catch (const SchemaError&) {
        throw SchemaError(field + ".kind: unknown copula '" + kind + "'");
    }
    const bool gaussian = c.kind == CopulaKind::gaussian_exchangeable || c.kind == CopulaKind::gaussian_ar1;
    const char* param = gaussian ? "rho" : (c.kind == CopulaKind::clayton ? "theta" : nullptr);
    reject_unknown(j, field, {"kind", "dim", param});
    c.dim = count_or(j, "dim", c.kind == CopulaKind::countermonotone ? 2 : default_dim, field);
    if (param) c.param = number_at(j, param, field);
    wrap_validation(field, [&] {
        validate(c);
        return Json();
    });
    return c;
}

Json to_json(const ProcessSpec& spec) {
    Json m = Json::array();
    for (const auto& d : spec.marginals) m.push_back(to_json(d));
    Json j{{"T", spec.T}, {"coords", spec.coords}, {"marginals", m}, {"temporal", to_json(spec.temporal)},
           {"spatial", to_json(spec.spatial)}};
    if (spec.allow_both) j["allow_both"] = true;
    return j;
}

ProcessSpec process_from_json(const Json& j, const std::string& field) {
    require_object(j, field);
    reject_unknown(j, field, {"T", "coords", "marginals", "temporal", "spatial", "allow_both"});
    ProcessSpec p;
    p.T = count_at(j, "T", field);
    p.coords = count_or(j, "coords", 1, field);
    const Json& m = member(j, "marginals", field);
    if (!m.is_array() || m.empty()) throw SchemaError(field + ".marginals: expected a nonempty array");
    p.marginals.clear();
    for (std::size_t k = 0; k < m.size(); ++k)
        p.marginals.push_back(distribution_from_json(m[k], field + ".marginals[" + std::to_string(k) + "]"));
    p.temporal = j.contains("temporal") ? copula_from_json(j["temporal"], p.T, field + ".temporal")
                                        : CopulaSpec::independence(p.T);
    p.spatial = j.contains("spatial") ? copula_from_json(j["spatial"], p.coords, field + ".spatial")
                                      : CopulaSpec::independence(p.coords);
    p.allow_both = bool_or(j, "allow_both", false, field);
    try {
        validate(p);
    } catch (const Error& e) {
        throw SchemaError(field + ": " + e.what());
    }
    return p;
}

Json to_json(const ChannelModel& m) {
    return Json{{"n_r", m.n_r}, {"n_t", m.n_t}, {"entry_law", to_json(m.entry_law)}, {"normalize", m.normalize},
                {"subchannels", m.subchannels}};
}

ChannelModel channel_model_from_json(const Json& j, const std::string& field) {
    require_object(j, field);
    reject_unknown(j, field, {"n_r", "n_t", "entry_law", "normalize", "subchannels"});
    ChannelModel m;
    m.n_r = static_cast<int>(count_at(j, "n_r", field));
    m.n_t = static_cast<int>(count_at(j, "n_t", field));
    if (j.contains("entry_law")) m.entry_law = distribution_from_json(j["entry_law"], field + ".entry_law");
    m.normalize = bool_or(j, "normalize", false, field);
    m.subchannels = static_cast<int>(count_or(j, "subchannels", 1, field));
    wrap_validation(field, [&] {
        validate(m);
        return Json();
    });
    return m;
}

Json to_json(const CapacityParams& p) {
    return Json{{"W", number(p.W)}, {"rho", number(p.rho)}, {"n_t", p.n_t},
                {"csit", p.csit == Csit::known ? "known" : "unknown"}};
}

CapacityParams capacity_params_from_json(const Json& j, const std::string& field) {
    require_object(j, field);
    reject_unknown(j, field, {"W", "rho", "n_t", "csit"});
    CapacityParams p;
    p.W = number_or(j, "W", 1.0, field);
    p.rho = number_or(j, "rho", 1.0, field);
    p.n_t = static_cast<int>(count_or(j, "n_t", 1, field));
    if (j.contains("csit")) {
        const auto c = string_at(j, "csit", field);
        if (c != "known" && c != "unknown") throw SchemaError(field + ".csit: expected \"known\" or \"unknown\"");
        p.csit = c == "known" ? Csit::known : Csit::unknown;
    }
    wrap_validation(field, [&] {
        validate(p);
        return Json();
    });
    return p;
}

Json to_json(const QueueConfig& c) {
    Json j{{"T", c.T}, {"paths", c.paths}, {"arrival", to_json(c.arrival)}};
    if (const auto* ps = std::get_if<ProcessSpec>(&c.service)) {
        j["service"] = Json{{"process", to_json(*ps)}};
    } else {
        const auto& cs = std::get<ChannelService>(c.service);
        j["service"] = Json{{"channel", Json{{"model", to_json(cs.model)},
                                             {"params", to_json(cs.params)},
                                             {"kappa", number(cs.kappa)},
                                             {"slot_duration", number(cs.slot_duration)},
                                             {"temporal", to_json(cs.temporal)}}}};
    }
    return j;
}

QueueConfig queue_config_from_json(const Json& j, const std::string& field) {
    require_object(j, field);
    reject_unknown(j, field, {"T", "paths", "arrival", "service"});
    QueueConfig c;
    c.T = count_at(j, "T", field);
    c.paths = count_at(j, "paths", field);
    c.arrival = process_from_json(member(j, "arrival", field), field + ".arrival");
    const Json& s = member(j, "service", field);
    require_object(s, field + ".service");
    reject_unknown(s, field + ".service", {"process", "channel"});
    if (s.contains("process") == s.contains("channel"))
        throw SchemaError(field + ".service: exactly one of \"process\" or \"channel\" is required");
    if (s.contains("process")) {
        c.service = process_from_json(s["process"], field + ".service.process");
    } else {
        const std::string f = field + ".service.channel";
        const Json& ch = s["channel"];
        require_object(ch, f);
        reject_unknown(ch, f, {"model", "params", "kappa", "slot_duration", "temporal"});
        ChannelService cs;
        cs.model = channel_model_from_json(member(ch, "model", f), f + ".model");
        cs.params = capacity_params_from_json(member(ch, "params", f), f + ".params");
        cs.kappa = number_or(ch, "kappa", 1.0, f);
        cs.slot_duration = number_or(ch, "slot_duration", 1.0, f);
        cs.temporal = ch.contains("temporal") ? copula_from_json(ch["temporal"], c.T, f + ".temporal")
                                              : CopulaSpec::independence(c.T);
        c.service = cs;
    }
    try {
        validate(c);
    } catch (const Error& e) {
        throw SchemaError(field + ": " + e.what());
    }
    return c;
}

Json to_json(const LightTailResult& r) {
    return Json{{"verdict", to_string(r.verdict)},
                {"points", r.points},
                {"semilog_slope_lower", number(r.semilog_slope_lower)},
                {"semilog_slope_upper", number(r.semilog_slope_upper)},
                {"loglog_slope_lower", number(r.loglog_slope_lower)},
                {"loglog_slope_upper", number(r.loglog_slope_upper)},
                {"stable_theta", number(r.stable_theta)},
                {"reason", r.reason}};
}

Json to_json(const RatioCurve& c) {
    return Json{{"grid", numbers(c.x_grid)},
                {"ratios", numbers(c.ratio)},
                {"ci", Json{{"lo", numbers(c.ci_lo)}, {"hi", numbers(c.ci_hi)}, {"halfwidth", numbers(c.ci_halfwidth)}}},
                {"exceedances", c.exceedances},
                {"trend", to_string(c.trend)},
                {"slope", number(c.slope)},
                {"slope_ci", {number(c.slope_ci_lo), number(c.slope_ci_hi)}},
                {"asymptote", number(c.asymptote)},
                {"asymptote_ci", {number(c.asymptote_ci_lo), number(c.asymptote_ci_hi)}}};
}

Json to_json(const CompositionReport& r) {
    Json j = to_json(r.curve);
    j["experiment"] = r.experiment;
    j["spec1"] = to_json(r.spec1);
    j["spec2"] = to_json(r.spec2);
    j["phi_alpha"] = number(r.phi_alpha);
    j["dominant_mass"] = numbers(r.dominant_mass);
    j["dominated_mass"] = numbers(r.dominated_mass);
    return j;
}

Json to_json(const ClosureReport& r) {
    return Json{{"experiment", "comonotone_closure"}, {"spec", to_json(r.spec)}, {"copies", r.copies},
                {"sum", to_json(r.sum)},      {"product", to_json(r.product)},
                {"sum_agrees", r.sum_agrees}, {"product_agrees", r.product_agrees}};
}

Json to_json(const ConditionReport& r) {
    Json rows = Json::array();
    for (const auto& row : r.rows) {
        Json checks = Json::array();
        for (const auto& c : row.checks)
            checks.push_back(Json{{"log_estimate", number(c.log_estimate)}, {"growth", number(c.growth)},
                                  {"max_share", number(c.max_share)}, {"hill_index", number(c.hill_index)},
                                  {"finite", c.finite}});
        std::vector<bool> fin(row.finite.begin(), row.finite.end());
        rows.push_back(Json{{"id", row.id}, {"theta", numbers(row.theta)}, {"finite", fin},
                            {"value", row.finite_any ? "finite" : "divergent"},
                            {"theta_witness", number(row.theta_witness)}, {"checks", checks}});
    }
    Json edges = Json::array(), violated = Json::array();
    for (const auto& [a, b] : r.edges) edges.push_back({a, b});
    for (const auto& [a, b] : r.violated) violated.push_back({a, b});
    return Json{{"conditions", rows}, {"edges", edges}, {"violated", violated}, {"dag_consistent", r.dag_consistent}};
}

Json to_json(const StopLossCurve& c) {
    return Json{{"t_grid", numbers(c.t_grid)}, {"pi", numbers(c.pi)}, {"se", numbers(c.se)},
                {"ci_halfwidth", numbers(c.ci_halfwidth)}, {"mean", number(c.mean)}, {"mean_ci", number(c.mean_ci)},
                {"variance", number(c.variance)}, {"n", c.n}};
}

Json to_json(const OrderVerdict& v) {
    return Json{{"relation", to_string(v.relation)}, {"outcome", to_string(v.outcome)},
                {"margin", number(v.margin)},        {"worst_at", number(v.worst_at)},
                {"grid", numbers(v.t_grid)},         {"z", numbers(v.z)},
                {"detail", v.detail}};
}

Json to_json(const PartialSumReport& r) {
    return Json{{"verdict", to_json(r.verdict)}, {"lo", to_json(r.lo)}, {"hi", to_json(r.hi)},
                {"certificates", r.certificates}};
}

Json to_json(const StrengthReport& r) {
    Json pairs = Json::array();
    for (std::size_t k = 0; k < r.verdicts.size(); ++k)
        pairs.push_back(Json{{"k", r.k_lo[k]}, {"k_prime", r.k_hi[k]}, {"verdict", to_json(r.verdicts[k])}});
    Json curves = Json::array();
    for (const auto& c : r.curves) curves.push_back(to_json(c));
    return Json{{"pairs", pairs}, {"curves", curves}, {"all_hold", r.all_hold}};
}

Json to_json(const BiasReport& r) {
    Json vs = Json::array();
    for (const auto& v : r.verdicts) vs.push_back(to_json(v));
    return Json{{"delta", numbers(r.delta)},       {"verdicts", vs}, {"delta_star", number(r.delta_star)},
                {"holds_at_zero", r.holds_at_zero}, {"outcome", to_string(r.outcome)}};
}

Json to_json(const RandomSumReport& r) {
    Json ws = Json::array();
    for (const auto& w : r.witnesses) ws.push_back(to_json(w));
    return Json{{"verdict", to_json(r.verdict)}, {"witnesses", ws}};
}

Json to_json(const BacklogStats& s) {
    Json qs = Json::array();
    for (const auto& q : s.quantiles)
        qs.push_back(Json{{"level", q.level}, {"value", number(q.value)}, {"ci", {number(q.ci_lo), number(q.ci_hi)}}});
    return Json{{"T", s.T},
                {"paths", s.paths},
                {"warmup", s.warmup},
                {"quantiles", qs},
                {"mean", number(s.mean)},
                {"mean_se", number(s.mean_se)},
                {"mean_arrival", number(s.mean_arrival)},
                {"mean_service", number(s.mean_service)},
                {"delay_mean", number(s.delay_mean)},
                {"delay_mean_se", number(s.delay_mean_se)},
                {"censored_fraction", number(s.censored_fraction)},
                {"unstable", s.unstable},
                {"nonstationary", s.nonstationary}};
}

Json to_json(const PowerTradeReport& r) {
    return Json{{"q", r.q},
                {"kappa_ref", number(r.kappa_ref)},
                {"kappa_star", number(r.kappa_star)},
                {"saving", number(r.saving)},
                {"ci", {number(r.ci_lo), number(r.ci_hi)}},
                {"target_quantile", number(r.target_quantile)},
                {"matched_quantile", number(r.matched_quantile)},
                {"batch_savings", numbers(r.batch_savings)},
                {"no_crossing", r.no_crossing},
                {"at_boundary", r.at_boundary}};
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : path_(path), width_(header.size()) {
    file_ = std::fopen(path.c_str(), "wb");
    if (!file_) throw Error("cannot open " + path + " for writing");
    for (std::size_t k = 0; k < header.size(); ++k) {
        if (k) std::fputc(',', file_);
        std::fputs(header[k].c_str(), file_);
    }
    std::fputc('\n', file_);
}

CsvWriter::~CsvWriter() {
    if (file_) std::fclose(file_);
}

void CsvWriter::row(const std::vector<double>& values) {
    if (values.size() != width_) throw ContractError("CsvWriter: row width does not match the header");
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (k) std::fputc(',', file_);
        std::fputs(format_number(values[k]).c_str(), file_);
    }
    std::fputc('\n', file_);
}

void write_csv(const PathMatrix& m, const std::string& path) {
    CsvWriter csv(path, {"path", "t", "coord", "value"});
    for (std::size_t p = 0; p < m.paths; ++p)
        for (std::size_t t = 0; t < m.T; ++t)
            for (std::size_t i = 0; i < m.coords; ++i)
                csv.row({static_cast<double>(p), static_cast<double>(t), static_cast<double>(i), m(p, t, i)});
}

} // namespace depctl
