#include "depctl/queueing.hpp"

#include "depctl/errors.hpp"
#include "depctl/hermitian_eigen.hpp"
#include "depctl/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace depctl {

namespace {

constexpr std::size_t kMinPaths = 200;
constexpr std::size_t kBootstrap = 200;
constexpr std::size_t kExceedancePoints = 41;
constexpr std::size_t kQuantileGrid = 201;

std::size_t warmup_slots(std::size_t T) { return T / 5; }

// Linear-interpolated (type 7) quantile without a full sort.
double select_quantile(std::vector<double>& xs, double q) {
    if (xs.empty()) throw ContractError("quantile of an empty sample");
    const double h = (static_cast<double>(xs.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(lo), xs.end());
    const double a = xs[lo];
    if (lo + 1 >= xs.size()) return a;
    const double b = *std::min_element(xs.begin() + static_cast<std::ptrdiff_t>(lo) + 1, xs.end());
    return a + (h - static_cast<double>(lo)) * (b - a);
}

struct ChannelDraws {
    std::size_t T = 0;
    std::size_t paths = 0;
    std::size_t stride = 0;
    std::vector<double> eig;  // (p * T + t) * stride
};

ChannelDraws channel_draws(const ChannelService& cs, std::size_t T, std::size_t paths, const RandomStream& stream,
                           Exec exec) {
    const auto& m = cs.model;
    const double scale = m.normalize ? normalization_factor(m.entry_law) : 1.0;
    const auto nr = static_cast<std::size_t>(m.n_r);
    const auto nt = static_cast<std::size_t>(m.n_t);
    const auto nsub = static_cast<std::size_t>(m.subchannels);
    const std::size_t entries = nr * nt * nsub;
    const CopulaSampler sampler(cs.temporal.kind == CopulaKind::independence ? CopulaSpec::independence(T)
                                                                               : cs.temporal);
    ChannelDraws d{T, paths, nr * nsub, {}};
    d.eig.resize(paths * T * d.stride);
    for_each_index(exec, paths, [&](std::size_t p) {
        RandomStream s = stream.substream(p);
        std::vector<double> mag(entries * T);
        std::vector<double> phase(entries * T);
        for (std::size_t e = 0; e < entries; ++e) {
            double* row = &mag[e * T];
            sampler.draw(s, row);
            for (std::size_t t = 0; t < T; ++t) row[t] = scale * quantile(m.entry_law, row[t]);
            for (std::size_t t = 0; t < T; ++t) phase[e * T + t] = 2.0 * std::numbers::pi * s.uniform();
        }
        for (std::size_t t = 0; t < T; ++t) {
            double* out = &d.eig[(p * T + t) * d.stride];
            if (entries == 1) {
                out[0] = mag[t] * mag[t];
                continue;
            }
            for (std::size_t b = 0; b < nsub; ++b) {
                ComplexMatrix h(nr, nt);
                for (std::size_t i = 0; i < nr; ++i)
                    for (std::size_t j = 0; j < nt; ++j) {
                        const std::size_t e = (b * nr + i) * nt + j;
                        const double r = mag[e * T + t];
                        const double phi = phase[e * T + t];
                        h(i, j) = cplx(r * std::cos(phi), r * std::sin(phi));
                    }
                if (h.is_zero()) {
                    std::fill(out + b * nr, out + (b + 1) * nr, 0.0);
                    continue;
                }
                const auto eig = eigen_hermitian(gram(h));
                std::copy(eig.eigenvalues.begin(), eig.eigenvalues.end(), out + b * nr);
            }
        }
    });
    return d;
}

void services_from_draws(const ChannelDraws& d, const ChannelService& cs, double kappa, std::size_t p,
                         double* out) {
    CapacityParams eff = cs.params;
    eff.rho = cs.params.rho * kappa;
    const auto nsub = static_cast<std::size_t>(cs.model.subchannels);
    std::vector<double> lambda(d.stride);
    for (std::size_t t = 0; t < d.T; ++t) {
        const double* e = &d.eig[(p * d.T + t) * d.stride];
        lambda.assign(e, e + d.stride);
        out[t] = cs.slot_duration * capacity_from_spectrum(lambda, eff, nsub);
    }
}

bool same_channel_service(const ChannelService& a, const ChannelService& b) {
    return a.model.n_r == b.model.n_r && a.model.n_t == b.model.n_t && a.model.entry_law == b.model.entry_law &&
           a.model.normalize == b.model.normalize && a.model.subchannels == b.model.subchannels &&
           a.params.W == b.params.W && a.params.rho == b.params.rho && a.params.n_t == b.params.n_t &&
           a.params.csit == b.params.csit && a.kappa == b.kappa && a.slot_duration == b.slot_duration;
}

} // namespace

std::vector<double> lindley(const std::vector<double>& a, const std::vector<double>& s) {
    if (a.size() != s.size())
        throw ContractError("lindley: arrival and service paths differ in length (" + std::to_string(a.size()) +
                            " vs " + std::to_string(s.size()) + ")");
    std::vector<double> b(a.size());
    double prev = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) {
        prev = std::max(prev + a[t] - s[t], 0.0);
        b[t] = prev;
    }
    return b;
}

DelayPath delay_path(const std::vector<double>& a, const std::vector<double>& s) {
    const auto b = lindley(a, s);
    const std::size_t T = a.size();
    std::vector<double> arrived(T), departed(T);
    double cum = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
        cum += a[t];
        arrived[t] = cum;
        departed[t] = cum - b[t];
    }
    DelayPath out{std::vector<std::size_t>(T, 0), std::vector<std::uint8_t>(T, 0)};
    std::size_t u = 0;
    for (std::size_t t = 0; t < T; ++t) {
        if (b[t] == 0.0) {
            u = std::max(u, t);
            continue;
        }
        u = std::max(u, t);
        const double need = arrived[t] - 1e-12 * std::max(1.0, arrived[t]);
        while (u < T && departed[u] < need) ++u;
        if (u == T) {
            out.delay[t] = T - t;
            out.censored[t] = 1;
        } else {
            out.delay[t] = u - t;
        }
    }
    return out;
}

void validate(const QueueConfig& config) {
    if (config.T < 1) throw ParameterError("queue: T must be >= 1");
    if (config.paths < 1) throw ParameterError("queue: paths must be >= 1");
    validate(config.arrival);
    if (config.arrival.coords != 1 || config.arrival.T != config.T)
        throw ParameterError("queue: arrival process must have one coordinate and T slots");
    if (const auto* ps = std::get_if<ProcessSpec>(&config.service)) {
        validate(*ps);
        if (ps->coords != 1 || ps->T != config.T)
            throw ParameterError("queue: service process must have one coordinate and T slots");
    } else {
        const auto& cs = std::get<ChannelService>(config.service);
        validate(cs.model);
        validate(cs.params);
        if (!(cs.kappa > 0.0) || !std::isfinite(cs.kappa)) throw ParameterError("queue: kappa must be positive");
        if (!(cs.slot_duration > 0.0)) throw ParameterError("queue: slot_duration must be positive");
        validate(cs.temporal);
        if (cs.temporal.kind != CopulaKind::independence && cs.temporal.dim != config.T)
            throw ParameterError("queue: service temporal copula dim must equal T");
    }
}

QueueInputs simulate_inputs(const QueueConfig& config, const RandomStream& stream, Exec exec) {
    validate(config);
    QueueInputs in{config.T, config.paths, {}, {}};
    in.arrivals = gen_process(config.arrival, stream.derive("arrival"), config.paths, exec).values;
    if (const auto* ps = std::get_if<ProcessSpec>(&config.service)) {
        in.services = gen_process(*ps, stream.derive("service"), config.paths, exec).values;
    } else {
        const auto& cs = std::get<ChannelService>(config.service);
        const auto d = channel_draws(cs, config.T, config.paths, stream.derive("service"), exec);
        in.services.resize(config.paths * config.T);
        for_each_index(exec, config.paths,
                       [&](std::size_t p) { services_from_draws(d, cs, cs.kappa, p, &in.services[p * config.T]); });
    }
    return in;
}

BacklogStats backlog_stats(const QueueConfig& config, const RandomStream& stream, Exec exec) {
    return backlog_stats(simulate_inputs(config, stream, exec), stream.derive("bootstrap"), exec);
}

BacklogStats backlog_stats(const QueueInputs& in, const RandomStream& bootstrap_stream, Exec exec) {
    if (in.paths < kMinPaths)
        throw ContractError("backlog_stats: at least " + std::to_string(kMinPaths) + " paths required");
    const std::size_t T = in.T, P = in.paths;
    if (in.arrivals.size() != T * P || in.services.size() != T * P)
        throw ContractError("backlog_stats: input arrays do not match T * paths");
    BacklogStats st;
    st.T = T;
    st.paths = P;
    st.warmup = warmup_slots(T);
    const std::size_t w = st.warmup, L = T - w;

    std::vector<double> backlog(T * P);
    std::vector<double> delay_mean(P), path_mean(P), half_gap(P);
    std::vector<std::size_t> censored(P, 0);
    for_each_index(exec, P, [&](std::size_t p) {
        const std::vector<double> a(in.arrivals.begin() + static_cast<std::ptrdiff_t>(p * T),
                                    in.arrivals.begin() + static_cast<std::ptrdiff_t>((p + 1) * T));
        const std::vector<double> s(in.services.begin() + static_cast<std::ptrdiff_t>(p * T),
                                    in.services.begin() + static_cast<std::ptrdiff_t>((p + 1) * T));
        const auto b = lindley(a, s);
        std::copy(b.begin(), b.end(), backlog.begin() + static_cast<std::ptrdiff_t>(p * T));
        const auto d = delay_path(a, s);
        double ds = 0.0, bs = 0.0, first = 0.0, second = 0.0;
        const std::size_t mid = w + L / 2;
        for (std::size_t t = w; t < T; ++t) {
            ds += static_cast<double>(d.delay[t]);
            censored[p] += d.censored[t];
            bs += b[t];
            (t < mid ? first : second) += b[t];
        }
        delay_mean[p] = ds / static_cast<double>(L);
        path_mean[p] = bs / static_cast<double>(L);
        half_gap[p] = (L >= 2) ? second / static_cast<double>(T - mid) - first / static_cast<double>(mid - w) : 0.0;
    });

    st.per_slot_mean.assign(T, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
        CompensatedSum acc;
        for (std::size_t p = 0; p < P; ++p) acc.add(backlog[p * T + t]);
        st.per_slot_mean[t] = acc.value() / static_cast<double>(P);
    }
    st.mean = mean(path_mean);
    st.mean_se = standard_error_of_mean(path_mean);
    st.delay_mean = mean(delay_mean);
    st.delay_mean_se = standard_error_of_mean(delay_mean);
    std::size_t cens = 0;
    for (auto c : censored) cens += c;
    st.censored_fraction = static_cast<double>(cens) / static_cast<double>(P * L);
    st.mean_arrival = mean(in.arrivals);
    st.mean_service = mean(in.services);
    st.unstable = st.mean_arrival >= st.mean_service;
    const double gap = mean(half_gap);
    const double gap_se = standard_error_of_mean(half_gap);
    st.nonstationary = gap > 4.0 * gap_se && gap > 0.0;

    // Pooled stationary window, plus each path's window sorted for counting.
    std::vector<double> pooled;
    pooled.reserve(P * L);
    std::vector<std::vector<double>> windows(P);
    for (std::size_t p = 0; p < P; ++p) {
        windows[p].assign(backlog.begin() + static_cast<std::ptrdiff_t>(p * T + w),
                          backlog.begin() + static_cast<std::ptrdiff_t>((p + 1) * T));
        pooled.insert(pooled.end(), windows[p].begin(), windows[p].end());
    }
    for_each_index(exec, P, [&](std::size_t p) { std::sort(windows[p].begin(), windows[p].end()); });
    std::sort(pooled.begin(), pooled.end());

    const std::vector<double> levels{0.5, 0.9, 0.99};
    std::vector<std::vector<double>> qgrid;
    for (double q : levels) {
        const double half = std::min(q, 1.0 - q) / 2.0;
        std::vector<double> g(kQuantileGrid);
        for (std::size_t k = 0; k < kQuantileGrid; ++k)
            g[k] = sorted_quantile(pooled, q - half + 2.0 * half * static_cast<double>(k) / (kQuantileGrid - 1));
        qgrid.push_back(std::move(g));
    }
    const double top = sorted_quantile(pooled, 0.999);
    st.x_grid.resize(kExceedancePoints);
    for (std::size_t k = 0; k < kExceedancePoints; ++k)
        st.x_grid[k] = top * static_cast<double>(k) / (kExceedancePoints - 1);

    // Per-path counts: values <= each quantile-grid point, values > each exceedance point.
    const std::size_t nq = levels.size() * kQuantileGrid;
    const std::size_t width = nq + kExceedancePoints;
    std::vector<double> counts(P * width);
    for_each_index(exec, P, [&](std::size_t p) {
        const auto& win = windows[p];
        double* row = &counts[p * width];
        for (std::size_t l = 0; l < levels.size(); ++l)
            for (std::size_t k = 0; k < kQuantileGrid; ++k)
                row[l * kQuantileGrid + k] =
                    static_cast<double>(std::upper_bound(win.begin(), win.end(), qgrid[l][k]) - win.begin());
        for (std::size_t k = 0; k < kExceedancePoints; ++k)
            row[nq + k] = static_cast<double>(win.end() - std::upper_bound(win.begin(), win.end(), st.x_grid[k]));
    });

    const double total = static_cast<double>(P * L);
    st.exceedance.resize(kExceedancePoints);
    for (std::size_t k = 0; k < kExceedancePoints; ++k) {
        double c = 0.0;
        for (std::size_t p = 0; p < P; ++p) c += counts[p * width + nq + k];
        st.exceedance[k] = c / total;
    }

    // Path bootstrap.
    std::vector<double> reps(kBootstrap * (levels.size() + kExceedancePoints));
    const std::size_t rw = levels.size() + kExceedancePoints;
    for_each_index(exec, kBootstrap, [&](std::size_t r) {
        RandomStream s = bootstrap_stream.substream(r);
        std::vector<double> acc(width, 0.0);
        for (std::size_t k = 0; k < P; ++k) {
            const double* row = &counts[s.below(P) * width];
            for (std::size_t j = 0; j < width; ++j) acc[j] += row[j];
        }
        for (std::size_t l = 0; l < levels.size(); ++l) {
            std::size_t k = 0;
            while (k + 1 < kQuantileGrid && acc[l * kQuantileGrid + k] / total < levels[l]) ++k;
            reps[r * rw + l] = qgrid[l][k];
        }
        for (std::size_t k = 0; k < kExceedancePoints; ++k) reps[r * rw + levels.size() + k] = acc[nq + k] / total;
    });
    const auto percentile_ci = [&](std::size_t col) {
        std::vector<double> v(kBootstrap);
        for (std::size_t r = 0; r < kBootstrap; ++r) v[r] = reps[r * rw + col];
        std::sort(v.begin(), v.end());
        return std::pair{sorted_quantile(v, 0.025), sorted_quantile(v, 0.975)};
    };
    for (std::size_t l = 0; l < levels.size(); ++l) {
        const auto [lo, hi] = percentile_ci(l);
        st.quantiles.push_back({levels[l], sorted_quantile(pooled, levels[l]), lo, hi});
    }
    st.exceedance_lo.resize(kExceedancePoints);
    st.exceedance_hi.resize(kExceedancePoints);
    for (std::size_t k = 0; k < kExceedancePoints; ++k) {
        const auto [lo, hi] = percentile_ci(levels.size() + k);
        st.exceedance_lo[k] = lo;
        st.exceedance_hi[k] = hi;
    }
    return st;
}

PowerTradeReport power_tradeoff(const QueueConfig& neg, const QueueConfig& ref, double q, double tolerance,
                                const RandomStream& stream, Exec exec, std::size_t batches) {
    validate(neg);
    validate(ref);
    if (!(q > 0.0 && q < 1.0)) throw ContractError("power_tradeoff: q must lie in (0, 1)");
    if (!(tolerance > 0.0)) throw ContractError("power_tradeoff: tolerance must be positive");
    const auto* cn = std::get_if<ChannelService>(&neg.service);
    const auto* cr = std::get_if<ChannelService>(&ref.service);
    if (!cn || !cr) throw ContractError("power_tradeoff: both configs need channel-driven service");
    if (!(neg.arrival == ref.arrival) || neg.T != ref.T || neg.paths != ref.paths || !same_channel_service(*cn, *cr))
        throw ContractError("power_tradeoff: configs must differ only in the service temporal copula");
    if (batches < 2 || neg.paths < batches) throw ContractError("power_tradeoff: need at least 2 batches of paths");

    const std::size_t T = ref.T, P = ref.paths, w = warmup_slots(T);
    const auto arrivals = gen_process(ref.arrival, stream.derive("arrival"), P, exec).values;
    const RandomStream service = stream.derive("service");
    const auto draws_neg = channel_draws(*cn, T, P, service, exec);
    const auto draws_ref = channel_draws(*cr, T, P, service, exec);

    const auto backlog_quantile = [&](const ChannelDraws& d, const ChannelService& cs, double kappa, std::size_t p0,
                                      std::size_t p1) {
        std::vector<double> pooled((p1 - p0) * (T - w));
        for_each_index(exec, p1 - p0, [&](std::size_t k) {
            const std::size_t p = p0 + k;
            std::vector<double> s(T);
            services_from_draws(d, cs, kappa, p, s.data());
            double prev = 0.0;
            for (std::size_t t = 0; t < T; ++t) {
                prev = std::max(prev + arrivals[p * T + t] - s[t], 0.0);
                if (t >= w) pooled[k * (T - w) + (t - w)] = prev;
            }
        });
        return select_quantile(pooled, q);
    };

    struct Match {
        double kappa = 0.0, target = 0.0, matched = 0.0;
        bool no_crossing = false, boundary = false;
    };
    const double k_ref = cr->kappa;
    const auto solve = [&](std::size_t p0, std::size_t p1) {
        Match m;
        m.target = backlog_quantile(draws_ref, *cr, k_ref, p0, p1);
        const double band = tolerance * std::max(std::abs(m.target), 1e-12);
        const auto f = [&](double kappa) { return backlog_quantile(draws_neg, *cn, kappa, p0, p1) - m.target; };
        double f_ref = f(k_ref);
        if (std::abs(f_ref) <= band) {
            m.kappa = k_ref;
            m.matched = m.target + f_ref;
            return m;
        }
        m.no_crossing = f_ref > 0.0;
        double lo = m.no_crossing ? k_ref : 0.05 * k_ref;  // f(lo) > 0 expected
        double hi = m.no_crossing ? 1.95 * k_ref : k_ref;  // f(hi) <= 0 expected
        if (m.no_crossing) {
            const double f_hi = f(hi);
            if (f_hi > band) {
                m.kappa = hi;
                m.matched = m.target + f_hi;
                m.boundary = true;
                return m;
            }
        } else {
            const double f_lo = f(lo);
            if (f_lo <= band) {
                m.kappa = lo;
                m.matched = m.target + f_lo;
                m.boundary = true;
                return m;
            }
        }
        for (int it = 0; it < 60 && hi - lo > 1e-7 * k_ref; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double f_mid = f(mid);
            if (std::abs(f_mid) <= band) {
                m.kappa = mid;
                m.matched = m.target + f_mid;
                return m;
            }
            (f_mid > 0.0 ? lo : hi) = mid;
        }
        m.kappa = hi;
        m.matched = m.target + f(hi);
        return m;
    };

    PowerTradeReport rep;
    rep.q = q;
    rep.kappa_ref = k_ref;
    const Match all = solve(0, P);
    rep.kappa_star = all.kappa;
    rep.saving = 1.0 - all.kappa / k_ref;
    rep.target_quantile = all.target;
    rep.matched_quantile = all.matched;
    rep.no_crossing = all.no_crossing;
    rep.at_boundary = all.boundary;
    for (std::size_t b = 0; b < batches; ++b) {
        const Match mb = solve(b * P / batches, (b + 1) * P / batches);
        rep.batch_savings.push_back(1.0 - mb.kappa / k_ref);
    }
    const double half = student_t_quantile(0.975, static_cast<double>(batches - 1)) *
                        standard_error_of_mean(rep.batch_savings);
    rep.ci_lo = rep.saving - half;
    rep.ci_hi = rep.saving + half;
    return rep;
}

} // namespace depctl
