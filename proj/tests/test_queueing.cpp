#include "depctl/errors.hpp"
#include "depctl/numeric.hpp"
#include "depctl/queueing.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace depctl;

namespace {

ProcessSpec iid(std::size_t T, const DistributionSpec& d) {
    return ProcessSpec{T, 1, {d}, CopulaSpec::independence(T), CopulaSpec::independence(1), false};
}

// max_{0<=k<=t} sum_{j=k+1..t} (a_j - s_j), floored at 0.
std::vector<double> max_plus_backlog(const std::vector<double>& a, const std::vector<double>& s) {
    std::vector<double> out(a.size());
    for (std::size_t t = 0; t < a.size(); ++t) {
        double best = 0.0, acc = 0.0;
        for (std::size_t k = t + 1; k-- > 0;) {
            acc += a[k] - s[k];
            best = std::max(best, acc);
        }
        out[t] = best;
    }
    return out;
}

QueueConfig channel_queue(std::size_t T, std::size_t paths, const CopulaSpec& temporal, double load) {
    QueueConfig c;
    c.T = T;
    c.paths = paths;
    ChannelService cs;
    cs.params.rho = 10.0;
    cs.temporal = temporal;
    c.service = cs;
    // Mean 1x1 Rayleigh capacity at rho = 10: e^{1/rho} E1(1/rho) / ln 2.
    const double mean_capacity = 2.9065;
    c.arrival = iid(T, DistributionSpec::exponential(1.0 / (load * mean_capacity)));
    return c;
}

} // namespace

TEST(Lindley, Examples) {
    EXPECT_EQ(lindley({1, 2, 3}, {1, 2, 3}), (std::vector<double>{0, 0, 0}));
    EXPECT_EQ(lindley({2, 2, 2, 2, 2}, {1, 1, 1, 1, 1}), (std::vector<double>{1, 2, 3, 4, 5}));
    EXPECT_EQ(lindley({3, 0, 0}, {1, 1, 1}), (std::vector<double>{2, 1, 0}));
    EXPECT_THROW(lindley({1, 2}, {1}), ContractError);
}

TEST(Lindley, MaxPlusFormMatchesExactly) {
    RandomStream s(1, "mp");
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> a(60), b(60);
        for (std::size_t i = 0; i < a.size(); ++i) {
            a[i] = std::floor(4 * s.uniform());
            b[i] = std::floor(4 * s.uniform());
        }
        EXPECT_EQ(lindley(a, b), max_plus_backlog(a, b));
    }
}

TEST(Delay, Examples) {
    const auto flat = delay_path({1, 1, 1}, {1, 1, 1});
    EXPECT_EQ(flat.delay, (std::vector<std::size_t>{0, 0, 0}));
    const auto burst = delay_path({2, 0, 0, 0}, {1, 1, 1, 1});
    EXPECT_EQ(burst.delay[0], 1u);
    EXPECT_FALSE(burst.censored[0]);
    const auto stuck = delay_path({5, 0}, {1, 1});
    EXPECT_TRUE(stuck.censored[0]);
}

TEST(Delay, ZeroWhenBacklogEmpty) {
    RandomStream s(2, "dz");
    std::vector<double> a(500), b(500);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = s.exponential() * 0.8;
        b[i] = 1.0;
    }
    const auto B = lindley(a, b);
    const auto D = delay_path(a, b);
    for (std::size_t t = 0; t < a.size(); ++t)
        if (B[t] == 0.0) EXPECT_EQ(D.delay[t], 0u);
}

TEST(Delay, LittlesLawWithArrivalRate) {
    // Little's law: E[D] ~ E[B] / E[a]. The ratio to E[s] is only equal when
    // the server never idles, which does not hold here.
    QueueConfig c;
    c.T = 20000;
    c.paths = 200;
    c.arrival = iid(c.T, DistributionSpec::exponential(1.25));
    c.service = iid(c.T, DistributionSpec::constant(1.0));
    const auto st = backlog_stats(c, RandomStream(3, "little"));
    EXPECT_NEAR(st.delay_mean, st.mean / st.mean_arrival, 0.15 * st.mean / st.mean_arrival);
    EXPECT_LT(st.censored_fraction, 0.01);
}

TEST(Backlog, ZeroLoad) {
    QueueConfig c;
    c.T = 100;
    c.paths = 200;
    c.arrival = iid(c.T, DistributionSpec::constant(0.0));
    c.service = iid(c.T, DistributionSpec::exponential(1.0));
    const auto st = backlog_stats(c, RandomStream(4, "zero"));
    EXPECT_EQ(st.mean, 0.0);
    for (const auto& q : st.quantiles) EXPECT_EQ(q.value, 0.0);
    EXPECT_EQ(st.delay_mean, 0.0);
    EXPECT_FALSE(st.unstable);
}

TEST(Backlog, LightTailedMd1LikeQueue) {
    QueueConfig c;
    c.T = 20000;
    c.paths = 200;
    c.arrival = iid(c.T, DistributionSpec::exponential(1.25));
    c.service = iid(c.T, DistributionSpec::constant(1.0));
    const auto st = backlog_stats(c, RandomStream(5, "md1"));
    ASSERT_EQ(st.quantiles.size(), 3u);
    EXPECT_TRUE(std::isfinite(st.quantiles[2].value));
    EXPECT_LE(st.quantiles[0].value, st.quantiles[1].value);
    EXPECT_LE(st.quantiles[1].value, st.quantiles[2].value);
    for (std::size_t i = 1; i < st.exceedance.size(); ++i) EXPECT_LE(st.exceedance[i], st.exceedance[i - 1]);
    // log P(B > x) is close to linear over the upper part of the grid.
    std::vector<double> xs, ys;
    for (std::size_t i = st.x_grid.size() / 2; i < st.x_grid.size(); ++i)
        if (st.exceedance[i] > 0) {
            xs.push_back(st.x_grid[i]);
            ys.push_back(std::log(st.exceedance[i]));
        }
    const auto fit = fit_line(xs, ys);
    double sse = 0, sst = 0;
    const double my = mean(ys);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sse += std::pow(ys[i] - fit.intercept - fit.slope * xs[i], 2);
        sst += std::pow(ys[i] - my, 2);
    }
    EXPECT_LT(fit.slope, 0.0);
    EXPECT_GT(1 - sse / sst, 0.98);
    EXPECT_FALSE(st.nonstationary);
}

TEST(Backlog, UnstableFlagged) {
    QueueConfig c;
    c.T = 2000;
    c.paths = 200;
    c.arrival = iid(c.T, DistributionSpec::exponential(0.5));
    c.service = iid(c.T, DistributionSpec::constant(1.0));
    const auto st = backlog_stats(c, RandomStream(6, "unstable"));
    EXPECT_TRUE(st.unstable);
    EXPECT_TRUE(st.nonstationary);
}

TEST(Backlog, NeedsTwoHundredPaths) {
    QueueConfig c;
    c.T = 10;
    c.paths = 50;
    c.arrival = iid(c.T, DistributionSpec::constant(0.0));
    c.service = iid(c.T, DistributionSpec::constant(1.0));
    EXPECT_THROW(backlog_stats(c, RandomStream(7, "few")), ContractError);
}

TEST(Backlog, MoreServiceNeverIncreasesBacklog) {
    auto lo = channel_queue(500, 200, CopulaSpec::gaussian_ar1(0.3, 500), 0.9);
    auto hi = lo;
    std::get<ChannelService>(hi.service).kappa = 1.3;
    const RandomStream s(8, "mono");
    const auto a = simulate_inputs(lo, s);
    const auto b = simulate_inputs(hi, s);
    ASSERT_EQ(a.arrivals, b.arrivals);
    for (std::size_t p = 0; p < a.paths; ++p) {
        const auto first = static_cast<std::ptrdiff_t>(p * a.T), last = static_cast<std::ptrdiff_t>((p + 1) * a.T);
        const std::vector<double> arr(a.arrivals.begin() + first, a.arrivals.begin() + last);
        const auto ba = lindley(arr, std::vector<double>(a.services.begin() + first, a.services.begin() + last));
        const auto bb = lindley(arr, std::vector<double>(b.services.begin() + first, b.services.begin() + last));
        for (std::size_t t = 0; t < a.T; ++t) ASSERT_LE(bb[t], ba[t]);
    }
}

TEST(Backlog, ServiceDependenceOrdersMeanBacklog) {
    const std::size_t T = 3000;
    double prev_mean = -1, prev_se = 0;
    for (double rho : {-0.6, 0.0, 0.6}) {
        QueueConfig c;
        c.T = T;
        c.paths = 200;
        c.arrival = iid(T, DistributionSpec::exponential(1.25));
        c.service = ProcessSpec{T, 1, {DistributionSpec::uniform(0.0, 2.0)},
                                rho == 0.0 ? CopulaSpec::independence(T) : CopulaSpec::gaussian_ar1(rho, T),
                                CopulaSpec::independence(1), false};
        const auto st = backlog_stats(c, RandomStream(9, "order"));
        if (prev_mean >= 0) EXPECT_LE(prev_mean, st.mean + 2 * std::hypot(prev_se, st.mean_se)) << rho;
        prev_mean = st.mean;
        prev_se = st.mean_se;
    }
}

TEST(Backlog, NegativeServiceDependenceLowersQ99) {
    const auto neg = channel_queue(3000, 200, CopulaSpec::gaussian_ar1(-0.6, 3000), 0.8);
    const auto ind = channel_queue(3000, 200, CopulaSpec::independence(3000), 0.8);
    const RandomStream s(10, "q99");
    const auto a = backlog_stats(neg, s);
    const auto b = backlog_stats(ind, s);
    EXPECT_LT(a.quantiles[2].ci_hi, b.quantiles[2].ci_lo);
}

TEST(Backlog, SerialEqualsParallel) {
    const auto c = channel_queue(400, 200, CopulaSpec::gaussian_ar1(-0.4, 400), 0.8);
    const RandomStream s(11, "sp");
    const auto a = backlog_stats(c, s, Exec::serial);
    const auto b = backlog_stats(c, s, Exec::parallel);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.exceedance, b.exceedance);
    EXPECT_EQ(a.quantiles[2].ci_lo, b.quantiles[2].ci_lo);
}

TEST(PowerTrade, SymmetricConfigsSaveNothing) {
    const auto ref = channel_queue(2000, 200, CopulaSpec::independence(2000), 0.8);
    const auto r = power_tradeoff(ref, ref, 0.99, 1e-3, RandomStream(12, "sym"));
    EXPECT_NEAR(r.saving, 0.0, 1e-9);
    EXPECT_LE(r.ci_lo, 0.0);
    EXPECT_GE(r.ci_hi, 0.0);
    EXPECT_FALSE(r.no_crossing);
}

TEST(PowerTrade, NegativeDependenceSavesPower) {
    const auto ref = channel_queue(2000, 200, CopulaSpec::independence(2000), 0.8);
    const auto neg = channel_queue(2000, 200, CopulaSpec::gaussian_ar1(-0.6, 2000), 0.8);
    const auto r = power_tradeoff(neg, ref, 0.99, 1e-3, RandomStream(13, "neg"));
    EXPECT_GT(r.ci_lo, 0.0);
    EXPECT_GT(r.saving, -1.0);
    EXPECT_LT(r.saving, 1.0);
    EXPECT_NEAR(r.matched_quantile, r.target_quantile, 0.05 * r.target_quantile);
}

TEST(PowerTrade, PositiveDependenceCostsPower) {
    const auto ref = channel_queue(2000, 200, CopulaSpec::independence(2000), 0.8);
    const auto pos = channel_queue(2000, 200, CopulaSpec::gaussian_ar1(0.6, 2000), 0.8);
    const auto r = power_tradeoff(pos, ref, 0.99, 1e-3, RandomStream(14, "pos"));
    EXPECT_TRUE(r.no_crossing);
    EXPECT_LT(r.saving, 0.0);
}

TEST(PowerTrade, Contracts) {
    const auto ref = channel_queue(100, 200, CopulaSpec::independence(100), 0.8);
    auto other = ref;
    std::get<ChannelService>(other.service).params.rho = 5.0;
    EXPECT_THROW(power_tradeoff(other, ref, 0.99, 1e-3, RandomStream(15, "c")), ContractError);
    QueueConfig plain = ref;
    plain.service = iid(100, DistributionSpec::constant(1.0));
    EXPECT_THROW(power_tradeoff(plain, ref, 0.99, 1e-3, RandomStream(15, "c")), ContractError);
    EXPECT_THROW(power_tradeoff(ref, ref, 1.5, 1e-3, RandomStream(15, "c")), ContractError);
}
