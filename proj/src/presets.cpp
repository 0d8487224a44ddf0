#include "depctl/harness.hpp"

#include "depctl/errors.hpp"

#include <boost/math/special_functions/expint.hpp>

#include <cmath>
#include <functional>
#include <map>

namespace depctl {

namespace {

using Builder = std::function<Json()>;

ProcessSpec iid_process(std::size_t T, std::size_t coords, const DistributionSpec& marginal) {
    return ProcessSpec{T, coords, {marginal}, CopulaSpec::independence(T), CopulaSpec::independence(coords), false};
}

ProcessSpec temporal_process(std::size_t T, const DistributionSpec& marginal, const CopulaSpec& temporal) {
    ProcessSpec p = iid_process(T, 1, marginal);
    p.temporal = temporal;
    return p;
}

ChannelModel rayleigh(int n_r, int n_t, bool normalize) {
    ChannelModel m;
    m.n_r = n_r;
    m.n_t = n_t;
    m.normalize = normalize;
    return m;
}

// E[log2(1 + rho X)] for X ~ Exp(1): e^{1/rho} E1(1/rho) / ln 2.
double rayleigh_mean_capacity(double rho) {
    return std::exp(1.0 / rho) * boost::math::expint(1, 1.0 / rho) / std::log(2.0);
}

Json power_trade(double service_rho) {
    constexpr std::size_t T = 5000, paths = 400;
    constexpr double snr = 10.0, load = 0.8;
    const double rate = 1.0 / (load * rayleigh_mean_capacity(snr));
    QueueConfig ref;
    ref.T = T;
    ref.paths = paths;
    ref.arrival = iid_process(T, 1, DistributionSpec::exponential(rate));
    ChannelService cs;
    cs.model = rayleigh(1, 1, false);
    cs.params.rho = snr;
    cs.temporal = CopulaSpec::independence(T);
    ref.service = cs;
    QueueConfig neg = ref;
    if (service_rho != 0.0) cs.temporal = CopulaSpec::gaussian_ar1(service_rho, T);
    neg.service = cs;
    const char* claim = service_rho < 0.0 ? "positive" : (service_rho > 0.0 ? "negative" : "zero");
    return Json{{"experiment", "power_tradeoff"}, {"neg", to_json(neg)}, {"ref", to_json(ref)},
                {"q", 0.99},                      {"tolerance", 1e-3},   {"claim", claim}};
}

Json partial_sum(const ProcessSpec& lo, const ProcessSpec& hi, bool reverse) {
    return Json{{"experiment", "partial_sum"}, {"lo", to_json(lo)}, {"hi", to_json(hi)}, {"paths", 100000},
                {"direction", reverse ? "reverse" : "forward"}};
}

const std::map<ExperimentKind, std::map<std::string, Builder>>& registry() {
    static const auto table = [] {
        std::map<ExperimentKind, std::map<std::string, Builder>> t;
        t[ExperimentKind::sample]["constant-1"] = [] {
            return Json{{"dist", to_json(DistributionSpec::constant(1.0))}, {"n", 3}};
        };
        t[ExperimentKind::capacity]["rayleigh-2x2"] = [] {
            CapacityParams p;
            p.rho = 10.0;
            p.n_t = 2;
            return Json{{"model", to_json(rayleigh(2, 2, true))}, {"power", to_json(DistributionSpec::constant(1.0))},
                        {"params", to_json(p)}, {"n", 100000}};
        };
        t[ExperimentKind::tail]["capacity-rayleigh-2x2"] = [] {
            CapacityParams p;
            p.rho = 10.0;
            p.n_t = 2;
            return Json{{"capacity", Json{{"model", to_json(rayleigh(2, 2, true))},
                                          {"power", to_json(DistributionSpec::constant(1.0))},
                                          {"params", to_json(p)}}},
                        {"n", 1000000},
                        {"expect", "light"}};
        };
        t[ExperimentKind::tail]["pareto2"] = [] {
            return Json{{"dist", to_json(DistributionSpec::pareto1(2.0, 1.0))}, {"n", 1000000}, {"expect", "heavy"}};
        };
        for (const auto& p : composition_presets()) {
            t[ExperimentKind::product_sum][p.name] = [p] {
                return Json{{"operation", p.product ? "product" : "sum"},
                            {"spec1", to_json(p.spec1)},
                            {"spec2", to_json(p.spec2)},
                            {"phi_alpha", p.phi_alpha},
                            {"n", 1000000},
                            {"expect", to_string(p.expected)}};
            };
        }
        t[ExperimentKind::product_sum]["comonotone-pareto2"] = [] {
            return Json{{"operation", "comonotone_closure"},
                        {"spec1", to_json(DistributionSpec::pareto1(2.0, 1.0))},
                        {"copies", 2},
                        {"n", 1000000}};
        };
        const auto uniform = DistributionSpec::uniform(0.0, 1.0);
        const auto expo = DistributionSpec::exponential(1.0);
        auto& orders = t[ExperimentKind::orders];
        for (bool reverse : {false, true}) {
            const std::string suffix = reverse ? "-reverse" : "";
            orders["sm-chain-indep-comonotone" + suffix] = [=] {
                return partial_sum(iid_process(8, 1, uniform),
                                   temporal_process(8, uniform, CopulaSpec::comonotone(8)), reverse);
            };
            orders["sm-chain-gauss" + suffix] = [=] {
                return partial_sum(temporal_process(8, uniform, CopulaSpec::gaussian_ar1(-0.8, 8)),
                                   temporal_process(8, uniform, CopulaSpec::gaussian_ar1(0.8, 8)), reverse);
            };
        }
        orders["bias-counter-uniform"] = [=] {
            ProcessSpec p = iid_process(1, 2, uniform);
            p.spatial = CopulaSpec::countermonotone();
            return Json{{"experiment", "bias"}, {"process", to_json(p)}, {"deltas", default_delta_grid()},
                        {"paths", 100000}};
        };
        orders["bias-comonotone-uniform"] = [=] {
            ProcessSpec p = iid_process(1, 2, uniform);
            p.spatial = CopulaSpec::comonotone(2);
            return Json{{"experiment", "bias"}, {"process", to_json(p)}, {"deltas", default_delta_grid()},
                        {"paths", 100000}};
        };
        orders["random-sum-poisson"] = [=] {
            return Json{{"experiment", "random_sum"},
                        {"count_law", to_json(DistributionSpec::poisson(5.0))},
                        {"counts_lo", to_json(CopulaSpec::independence(2))},
                        {"counts_hi", to_json(CopulaSpec::comonotone(2))},
                        {"increments_lo", {to_json(expo), to_json(expo)}},
                        {"increments_hi", {to_json(expo), to_json(expo)}},
                        {"n", 1000000}};
        };
        orders["strength-ar1-uniform"] = [=] {
            const auto base = temporal_process(4, uniform, CopulaSpec::gaussian_ar1(0.5, 4));
            Json modified = Json::array();
            for (int j = 0; j < 4; ++j) modified.push_back(to_json(uniform.shifted(0.25)));
            return Json{{"experiment", "strength"}, {"base", to_json(base)}, {"modified", modified},
                        {"paths", 100000}};
        };
        auto& queue = t[ExperimentKind::queue];
        queue["backlog-md1"] = [] {
            constexpr std::size_t T = 10000;
            QueueConfig c;
            c.T = T;
            c.paths = 200;
            c.arrival = iid_process(T, 1, DistributionSpec::exponential(1.25));
            c.service = iid_process(T, 1, DistributionSpec::constant(1.0));
            return Json{{"experiment", "backlog"}, {"config", to_json(c)}};
        };
        queue["power-ar1-neg"] = [] { return power_trade(-0.6); };
        queue["power-symmetric"] = [] { return power_trade(0.0); };
        queue["power-ar1-pos"] = [] { return power_trade(0.6); };
        auto& chain = t[ExperimentKind::condition_chain];
        chain["rayleigh-2x2"] = [] {
            CapacityParams p;
            p.rho = 10.0;
            p.n_t = 2;
            return Json{{"model", to_json(rayleigh(2, 2, true))}, {"power", to_json(DistributionSpec::constant(1.0))},
                        {"params", to_json(p)}, {"n", 100000}};
        };
        chain["rayleigh-1x1-pareto0.5"] = [] {
            CapacityParams p;
            p.rho = 10.0;
            return Json{{"model", to_json(rayleigh(1, 1, false))}, {"power", to_json(DistributionSpec::pareto1(0.5, 1.0))},
                        {"params", to_json(p)}, {"n", 100000}};
        };
        return t;
    }();
    return table;
}

} // namespace

std::vector<std::string> preset_names(ExperimentKind kind) {
    std::vector<std::string> out;
    const auto& t = registry();
    if (auto it = t.find(kind); it != t.end())
        for (const auto& [name, builder] : it->second) out.push_back(name);
    return out;
}

Json preset_payload(ExperimentKind kind, const std::string& name) {
    const auto& t = registry();
    if (auto it = t.find(kind); it != t.end())
        if (auto p = it->second.find(name); p != it->second.end()) return p->second();
    throw SchemaError("preset: unknown " + kind_name(kind) + " preset '" + name + "'");
}

} // namespace depctl
