#include "depctl/dependence.hpp"
#include "depctl/errors.hpp"
#include "depctl/numeric.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace depctl;

namespace {

double spearman_cols(const UniformMatrix& m, std::size_t a, std::size_t b) {
    return spearman(m.column(a), m.column(b));
}

// Pearson correlation of (F^-1(Phi(Z1)), F^-1(Phi(Z2))) for standard
// exponential F and corr(Z1, Z2) = r, by a tensor trapezoid rule.
double exp_norta_correlation(double r) {
    const int n = 801;
    const double lo = -8.0, hi = 8.0, h = (hi - lo) / (n - 1);
    auto q = [](double z) { return -std::log(0.5 * std::erfc(z / std::sqrt(2.0))); };
    auto phi2 = [&](double x, double y) {
        const double d = 1 - r * r;
        return std::exp(-(x * x - 2 * r * x * y + y * y) / (2 * d)) / (2 * std::numbers::pi * std::sqrt(d));
    };
    double exy = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double x = lo + i * h, y = lo + j * h;
            const double w = (i == 0 || i == n - 1 ? 0.5 : 1.0) * (j == 0 || j == n - 1 ? 0.5 : 1.0);
            exy += w * q(x) * q(y) * phi2(x, y);
        }
    exy *= h * h;
    return exy - 1.0;  // mean 1, variance 1
}

ProcessSpec iid(std::size_t T, std::size_t coords, const DistributionSpec& d) {
    return ProcessSpec{T, coords, {d}, CopulaSpec::independence(T), CopulaSpec::independence(coords), false};
}

} // namespace

TEST(Copula, Validation) {
    EXPECT_THROW(validate(CopulaSpec::gaussian_exchangeable(1.5, 2)), ParameterError);
    EXPECT_THROW(validate(CopulaSpec::gaussian_exchangeable(-0.6, 3)), ParameterError);
    EXPECT_THROW(validate(CopulaSpec::gaussian_ar1(-1.0, 3)), ParameterError);
    EXPECT_THROW(validate(CopulaSpec::clayton(-1.0, 2)), ParameterError);
    EXPECT_THROW(validate(CopulaSpec{CopulaKind::countermonotone, 0.0, 3}), ParameterError);
    EXPECT_NO_THROW(validate(CopulaSpec::gaussian_exchangeable(-0.5, 2)));
}

TEST(Copula, ComonotoneCoordinatesEqual) {
    const auto m = sample_copula(CopulaSpec::comonotone(3), RandomStream(1, "c"), 1000);
    for (std::size_t r = 0; r < m.rows; ++r) {
        EXPECT_EQ(m(r, 0), m(r, 1));
        EXPECT_EQ(m(r, 0), m(r, 2));
    }
}

TEST(Copula, CountermonotoneMirrors) {
    const auto m = sample_copula(CopulaSpec::countermonotone(), RandomStream(2, "cm"), 1000);
    for (std::size_t r = 0; r < m.rows; ++r) EXPECT_NEAR(m(r, 0) + m(r, 1), 1.0, 1e-15);
}

TEST(Copula, MarginalsUniformForEveryKind) {
    for (const auto& spec : {CopulaSpec::independence(3), CopulaSpec::gaussian_exchangeable(0.6, 3),
                             CopulaSpec::gaussian_ar1(-0.7, 3), CopulaSpec::clayton(2.0, 3)}) {
        const auto m = sample_copula(spec, RandomStream(3, describe(spec)), 20000);
        for (std::size_t c = 0; c < 3; ++c)
            EXPECT_LT(ks_one_sample(m.column(c), [](double u) { return u; }), ks_critical_1pct(m.rows))
                << describe(spec) << " col " << c;
    }
}

TEST(Copula, SpearmanMatchesArcsineRelation) {
    const auto zero = sample_copula(CopulaSpec::gaussian_exchangeable(0.0, 2), RandomStream(4, "s0"), 100000);
    EXPECT_NEAR(spearman_cols(zero, 0, 1), 0.0, 0.01);
    const auto m = sample_copula(CopulaSpec::gaussian_exchangeable(0.8, 2), RandomStream(4, "s8"), 100000);
    EXPECT_NEAR(spearman_cols(m, 0, 1), 6.0 / std::numbers::pi * std::asin(0.4), 0.01);
}

TEST(Copula, GaussianOrthantProbability) {
    // P(U1 > 1/2, U2 > 1/2) = 1/4 + asin(rho) / (2 pi) under a Gaussian copula.
    for (double rho : {-0.6, 0.3}) {
        const auto m = sample_copula(CopulaSpec::gaussian_ar1(rho, 2), RandomStream(5, "orth"), 200000);
        double hit = 0;
        for (std::size_t r = 0; r < m.rows; ++r) hit += m(r, 0) > 0.5 && m(r, 1) > 0.5;
        EXPECT_NEAR(hit / m.rows, 0.25 + std::asin(rho) / (2 * std::numbers::pi), 0.004);
    }
}

TEST(Copula, ClaytonKendallTau) {
    // Kendall's tau of Clayton(theta) is theta / (theta + 2); checked through
    // the Spearman bound via a direct pair count on a small sample.
    const auto m = sample_copula(CopulaSpec::clayton(2.0, 2), RandomStream(6, "cl"), 3000);
    double conc = 0, pairs = 0;
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = i + 1; j < m.rows; ++j) {
            conc += ((m(i, 0) - m(j, 0)) * (m(i, 1) - m(j, 1)) > 0) ? 1.0 : -1.0;
            pairs += 1;
        }
    EXPECT_NEAR(conc / pairs, 0.5, 0.03);
}

TEST(Norta, UniformIsIdentityAndComonotonePreserved) {
    const auto u = sample_copula(CopulaSpec::gaussian_ar1(0.5, 2), RandomStream(7, "n"), 100);
    const auto same = norta(u, {DistributionSpec::uniform(0, 1), DistributionSpec::uniform(0, 1)});
    for (std::size_t i = 0; i < u.data.size(); ++i) EXPECT_NEAR(same.data[i], u.data[i], 1e-15);
    const auto c = sample_copula(CopulaSpec::comonotone(2), RandomStream(7, "nc"), 100);
    const auto p = norta(c, {DistributionSpec::pareto1(2, 1), DistributionSpec::pareto1(2, 1)});
    for (std::size_t r = 0; r < p.rows; ++r) EXPECT_EQ(p(r, 0), p(r, 1));
    EXPECT_THROW(norta(c, {DistributionSpec::uniform(0, 1)}), ContractError);
}

TEST(Norta, Ar1ExponentialLagOneCorrelation) {
    const double want = exp_norta_correlation(0.7);
    EXPECT_NEAR(want, 0.66, 0.02);
    ProcessSpec p = iid(2, 1, DistributionSpec::exponential(1.0));
    p.temporal = CopulaSpec::gaussian_ar1(0.7, 2);
    const auto m = gen_process(p, RandomStream(8, "ar"), 100000);
    std::vector<double> a(m.paths), b(m.paths);
    for (std::size_t i = 0; i < m.paths; ++i) {
        a[i] = m(i, 0, 0);
        b[i] = m(i, 1, 0);
    }
    EXPECT_NEAR(pearson(a, b), want, 0.02);
}

TEST(Norta, MarginalsAndSpearmanInvariance) {
    const auto u = sample_copula(CopulaSpec::gaussian_exchangeable(0.5, 3), RandomStream(9, "inv"), 100000);
    const std::vector<DistributionSpec> ms{DistributionSpec::exponential(2), DistributionSpec::pareto1(2, 1),
                                           DistributionSpec::lognormal(0, 1)};
    const auto x = norta(u, ms);
    for (std::size_t c = 0; c < 3; ++c)
        EXPECT_LT(ks_one_sample(x.column(c), [&](double v) { return cdf(ms[c], v); }), ks_critical_1pct(x.rows));
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = a + 1; b < 3; ++b) EXPECT_NEAR(spearman_cols(u, a, b), spearman_cols(x, a, b), 0.01);
}

TEST(Process, IidAndSpatialComonotone) {
    const auto m = gen_process(iid(4, 2, DistributionSpec::uniform(0, 1)), RandomStream(10, "iid"), 20000);
    std::vector<double> a, b;
    for (std::size_t p = 0; p < m.paths; ++p) {
        a.push_back(m(p, 0, 0));
        b.push_back(m(p, 3, 1));
    }
    EXPECT_LT(std::abs(pearson(a, b)), 0.03);

    ProcessSpec s = iid(1, 3, DistributionSpec::exponential(1.0));
    s.spatial = CopulaSpec::comonotone(3);
    const auto c = gen_process(s, RandomStream(10, "sp"), 100);
    for (std::size_t p = 0; p < c.paths; ++p) {
        EXPECT_EQ(c(p, 0, 0), c(p, 0, 1));
        EXPECT_EQ(c(p, 0, 0), c(p, 0, 2));
    }
}

TEST(Process, NegativeAr1AlternatesSign) {
    ProcessSpec p = iid(6, 1, DistributionSpec::uniform(0, 1));
    p.temporal = CopulaSpec::gaussian_ar1(-0.6, 6);
    const auto m = gen_process(p, RandomStream(11, "alt"), 100000);
    for (std::size_t lag = 1; lag <= 3; ++lag) {
        std::vector<double> a, b;
        for (std::size_t q = 0; q < m.paths; ++q) {
            a.push_back(m(q, 0, 0));
            b.push_back(m(q, lag, 0));
        }
        // Spearman of a Gaussian copula: (6/pi) asin(r/2) with r = (-0.6)^lag.
        const double r = std::pow(-0.6, static_cast<double>(lag));
        EXPECT_NEAR(spearman(a, b), 6.0 / std::numbers::pi * std::asin(r / 2.0), 0.015) << lag;
    }
}

TEST(Process, BothAxesNeedOverride) {
    ProcessSpec p = iid(3, 2, DistributionSpec::uniform(0, 1));
    p.temporal = CopulaSpec::gaussian_ar1(0.5, 3);
    p.spatial = CopulaSpec::gaussian_exchangeable(0.5, 2);
    EXPECT_THROW(gen_process(p, RandomStream(12, "both"), 10), ContractError);
    p.allow_both = true;
    EXPECT_NO_THROW(gen_process(p, RandomStream(12, "both"), 10));
}

TEST(Process, MarginalLayouts) {
    ProcessSpec p = iid(2, 2, DistributionSpec::uniform(0, 1));
    p.marginals = {DistributionSpec::constant(1), DistributionSpec::constant(2), DistributionSpec::constant(3),
                   DistributionSpec::constant(4)};
    const auto m = gen_process(p, RandomStream(13, "lay"), 2);
    EXPECT_EQ(m(1, 0, 0), 1.0);
    EXPECT_EQ(m(1, 0, 1), 2.0);
    EXPECT_EQ(m(1, 1, 0), 3.0);
    EXPECT_EQ(m(1, 1, 1), 4.0);
    p.marginals.pop_back();
    EXPECT_THROW(gen_process(p, RandomStream(13, "lay"), 2), ParameterError);
}

TEST(Process, SerialEqualsParallel) {
    ProcessSpec p = iid(8, 2, DistributionSpec::lognormal(0, 1));
    p.temporal = CopulaSpec::gaussian_ar1(0.4, 8);
    const RandomStream s(14, "sp");
    EXPECT_EQ(gen_process(p, s, 3000, Exec::serial).values, gen_process(p, s, 3000, Exec::parallel).values);
    EXPECT_EQ(sample_copula(CopulaSpec::clayton(1.0, 3), s, 9000, Exec::serial).data,
              sample_copula(CopulaSpec::clayton(1.0, 3), s, 9000, Exec::parallel).data);
}

TEST(SmPair, Certificates) {
    const auto u = DistributionSpec::uniform(0, 1);
    ProcessSpec lo = iid(1, 2, u), hi = lo;
    hi.spatial = CopulaSpec::comonotone(2);
    EXPECT_FALSE(sm_pair(lo, hi).certificates.empty());

    ProcessSpec a = lo, b = lo;
    a.spatial = CopulaSpec::gaussian_exchangeable(-0.5, 2);
    b.spatial = CopulaSpec::gaussian_exchangeable(0.5, 2);
    EXPECT_NO_THROW(sm_pair(a, b));
    EXPECT_THROW(sm_pair(b, a), ParameterError);

    ProcessSpec c = lo;
    c.spatial = CopulaSpec::clayton(2.0, 2);
    EXPECT_THROW(sm_pair(c, b), ParameterError);

    ProcessSpec d = hi;
    d.marginals = {DistributionSpec::exponential(1.0)};
    EXPECT_THROW(sm_pair(lo, d), ContractError);
}
