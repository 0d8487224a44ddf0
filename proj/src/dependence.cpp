#include "depctl/dependence.hpp"

#include "depctl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace depctl {

namespace {

constexpr std::size_t kRowChunk = 4096;

double uniform_from_normal(double z) {
    const double u = 0.5 * std::erfc(-z / std::sqrt(2.0));
    return std::clamp(u, 0x1.0p-1074, 1.0 - 0x1.0p-53);
}

// Transforms `dim` i.i.d. standard normals spaced `stride` apart into the
// correlated normals of a Gaussian-family copula, in place.
void gaussian_correlate(const CopulaSpec& spec, double* z, std::size_t stride) {
    const std::size_t d = spec.dim;
    switch (spec.kind) {
    case CopulaKind::independence:
        return;
    case CopulaKind::gaussian_ar1: {
        const double rho = spec.param;
        const double innov = std::sqrt(1.0 - rho * rho);
        for (std::size_t k = 1; k < d; ++k)
            z[k * stride] = rho * z[(k - 1) * stride] + innov * z[k * stride];
        return;
    }
    case CopulaKind::gaussian_exchangeable: {
        // Y = sqrt(1-rho) (eps - c mean(eps)), c chosen so Cov(Y) has unit
        // diagonal and off-diagonal rho.
        const double rho = spec.param;
        const double c = 1.0 - std::sqrt(1.0 + static_cast<double>(d) * rho / (1.0 - rho));
        double total = 0.0;
        for (std::size_t k = 0; k < d; ++k) total += z[k * stride];
        const double shift = c * total / static_cast<double>(d);
        const double s = std::sqrt(1.0 - rho);
        for (std::size_t k = 0; k < d; ++k) z[k * stride] = s * (z[k * stride] - shift);
        return;
    }
    default:
        throw ContractError("gaussian_correlate: not a Gaussian-family copula");
    }
}

double gaussian_corr_at_lag(const CopulaSpec& spec, std::size_t lag) {
    if (lag == 0) return 1.0;
    switch (spec.kind) {
    case CopulaKind::independence: return 0.0;
    case CopulaKind::gaussian_exchangeable: return spec.param;
    case CopulaKind::gaussian_ar1: return std::pow(spec.param, static_cast<double>(lag));
    default: throw ContractError("gaussian_corr_at_lag: not a Gaussian-family copula");
    }
}

} // namespace

CopulaSpec CopulaSpec::independence(std::size_t dim) { return {CopulaKind::independence, 0.0, dim}; }
CopulaSpec CopulaSpec::comonotone(std::size_t dim) { return {CopulaKind::comonotone, 0.0, dim}; }
CopulaSpec CopulaSpec::countermonotone() { return {CopulaKind::countermonotone, 0.0, 2}; }
CopulaSpec CopulaSpec::gaussian_exchangeable(double rho, std::size_t dim) {
    return {CopulaKind::gaussian_exchangeable, rho, dim};
}
CopulaSpec CopulaSpec::gaussian_ar1(double rho, std::size_t dim) {
    return {CopulaKind::gaussian_ar1, rho, dim};
}
CopulaSpec CopulaSpec::clayton(double theta, std::size_t dim) {
    return {CopulaKind::clayton, theta, dim};
}

std::string kind_name(CopulaKind k) {
    switch (k) {
    case CopulaKind::independence: return "independence";
    case CopulaKind::comonotone: return "comonotone";
    case CopulaKind::countermonotone: return "countermonotone";
    case CopulaKind::gaussian_exchangeable: return "gaussian_exchangeable";
    case CopulaKind::gaussian_ar1: return "gaussian_ar1";
    case CopulaKind::clayton: return "clayton";
    }
    return "?";
}

CopulaKind copula_kind_from_name(const std::string& name) {
    for (auto k : {CopulaKind::independence, CopulaKind::comonotone, CopulaKind::countermonotone,
                   CopulaKind::gaussian_exchangeable, CopulaKind::gaussian_ar1, CopulaKind::clayton}) {
        if (kind_name(k) == name) return k;
    }
    throw SchemaError("copula.kind: unknown copula '" + name + "'");
}

std::string describe(const CopulaSpec& spec) {
    std::ostringstream os;
    os << kind_name(spec.kind) << "(";
    if (spec.kind == CopulaKind::gaussian_exchangeable || spec.kind == CopulaKind::gaussian_ar1)
        os << "rho=" << spec.param << ", ";
    else if (spec.kind == CopulaKind::clayton)
        os << "theta=" << spec.param << ", ";
    os << "dim=" << spec.dim << ")";
    return os.str();
}

void validate(const CopulaSpec& spec) {
    if (spec.dim < 1) throw ParameterError("copula dim must be >= 1");
    const double p = spec.param;
    switch (spec.kind) {
    case CopulaKind::independence:
    case CopulaKind::comonotone:
        return;
    case CopulaKind::countermonotone:
        if (spec.dim != 2) throw ParameterError("countermonotone copula exists only for dim 2");
        return;
    case CopulaKind::gaussian_exchangeable: {
        const double lower = spec.dim > 1 ? -1.0 / static_cast<double>(spec.dim - 1) : -1.0;
        if (!(p > lower && p < 1.0))
            throw ParameterError("gaussian_exchangeable: rho must lie in (" + std::to_string(lower) +
                                 ", 1) for dim " + std::to_string(spec.dim));
        return;
    }
    case CopulaKind::gaussian_ar1:
        if (!(std::abs(p) < 1.0)) throw ParameterError("gaussian_ar1: |rho| must be < 1");
        return;
    case CopulaKind::clayton:
        if (!(p >= 0.0) || !std::isfinite(p)) throw ParameterError("clayton: theta must be >= 0");
        return;
    }
}

bool is_gaussian_family(const CopulaSpec& spec) {
    return spec.kind == CopulaKind::independence || spec.kind == CopulaKind::gaussian_exchangeable ||
           spec.kind == CopulaKind::gaussian_ar1;
}

std::vector<double> gaussian_correlation(const CopulaSpec& spec) {
    validate(spec);
    if (!is_gaussian_family(spec)) throw ContractError("gaussian_correlation: not a Gaussian-family copula");
    const std::size_t d = spec.dim;
    std::vector<double> r(d * d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            r[i * d + j] = gaussian_corr_at_lag(spec, i > j ? i - j : j - i);
    return r;
}

std::vector<double> UniformMatrix::column(std::size_t c) const {
    if (c >= dim) throw ContractError("UniformMatrix::column: index out of range");
    std::vector<double> out(rows);
    for (std::size_t r = 0; r < rows; ++r) out[r] = data[r * dim + c];
    return out;
}

CopulaSampler::CopulaSampler(const CopulaSpec& spec) : spec_(spec) { validate(spec_); }

void CopulaSampler::draw(RandomStream& stream, double* out) const {
    const std::size_t d = spec_.dim;
    switch (spec_.kind) {
    case CopulaKind::independence:
    case CopulaKind::gaussian_exchangeable:
    case CopulaKind::gaussian_ar1:
        for (std::size_t k = 0; k < d; ++k) out[k] = stream.normal();
        gaussian_correlate(spec_, out, 1);
        for (std::size_t k = 0; k < d; ++k) out[k] = uniform_from_normal(out[k]);
        return;
    case CopulaKind::comonotone: {
        const double u = stream.uniform();
        std::fill(out, out + d, u);
        return;
    }
    case CopulaKind::countermonotone: {
        const double u = stream.uniform();
        out[0] = u;
        out[1] = 1.0 - u;
        return;
    }
    case CopulaKind::clayton: {
        const double theta = spec_.param;
        if (theta == 0.0) {
            for (std::size_t k = 0; k < d; ++k) out[k] = stream.uniform();
            return;
        }
        // Marshall-Olkin: U_k = (1 + E_k / V)^(-1/theta), V ~ Gamma(1/theta).
        const double v = sample_gamma(1.0 / theta, stream);
        for (std::size_t k = 0; k < d; ++k) {
            const double e = stream.exponential();
            const double u = std::exp(-std::log1p(e / v) / theta);
            out[k] = std::clamp(u, 0x1.0p-1074, 1.0 - 0x1.0p-53);
        }
        return;
    }
    }
}

UniformMatrix sample_copula(const CopulaSpec& spec, const RandomStream& stream, std::size_t n, Exec exec) {
    const CopulaSampler sampler(spec);
    UniformMatrix m{n, spec.dim, std::vector<double>(n * spec.dim)};
    const std::size_t chunks = (n + kRowChunk - 1) / kRowChunk;
    for_each_index(exec, chunks, [&](std::size_t c) {
        RandomStream s = stream.substream(c);
        const std::size_t end = std::min(n, (c + 1) * kRowChunk);
        for (std::size_t r = c * kRowChunk; r < end; ++r) sampler.draw(s, &m.data[r * spec.dim]);
    });
    return m;
}

UniformMatrix norta(const UniformMatrix& uniforms, const std::vector<DistributionSpec>& marginals) {
    if (marginals.size() != uniforms.dim)
        throw ContractError("norta: " + std::to_string(marginals.size()) + " marginals for dimension " +
                            std::to_string(uniforms.dim));
    for (const auto& m : marginals) validate(m);
    UniformMatrix out{uniforms.rows, uniforms.dim, std::vector<double>(uniforms.data.size())};
    for (std::size_t r = 0; r < uniforms.rows; ++r)
        for (std::size_t c = 0; c < uniforms.dim; ++c)
            out.data[r * out.dim + c] = quantile(marginals[c], uniforms.data[r * out.dim + c]);
    return out;
}

const DistributionSpec& ProcessSpec::marginal(std::size_t t, std::size_t i) const {
    if (marginals.size() == 1) return marginals[0];
    if (marginals.size() == coords) return marginals[i];
    return marginals[t * coords + i];
}

void validate(const ProcessSpec& spec) {
    if (spec.T < 1 || spec.coords < 1) throw ParameterError("process: T and coords must be >= 1");
    const std::size_t m = spec.marginals.size();
    if (m != 1 && m != spec.coords && m != spec.T * spec.coords)
        throw ParameterError("process: marginals must have 1, coords or T*coords entries");
    for (const auto& m : spec.marginals) validate(m);
    validate(spec.temporal);
    validate(spec.spatial);
    const bool temporal_dep = spec.temporal.kind != CopulaKind::independence;
    const bool spatial_dep = spec.spatial.kind != CopulaKind::independence;
    if (temporal_dep && spec.temporal.dim != spec.T)
        throw ParameterError("process: temporal copula dim must equal T");
    if (spatial_dep && spec.spatial.dim != spec.coords)
        throw ParameterError("process: spatial copula dim must equal coords");
    if (temporal_dep && spatial_dep) {
        if (!spec.allow_both)
            throw ContractError("process: temporal and spatial copulas are both dependent; "
                                "set allow_both to override");
        if (!is_gaussian_family(spec.temporal) || !is_gaussian_family(spec.spatial))
            throw ContractError("process: both-axis dependence requires Gaussian-family copulas");
    }
}

std::vector<double> PathMatrix::weighted_sums(const std::vector<double>& weights) const {
    const std::size_t width = T * coords;
    if (!weights.empty() && weights.size() != width)
        throw ContractError("weighted_sums: expected " + std::to_string(width) + " weights");
    std::vector<double> out(paths);
    for (std::size_t p = 0; p < paths; ++p) {
        const double* row = &values[p * width];
        double s = 0.0;
        for (std::size_t k = 0; k < width; ++k) s += (weights.empty() ? 1.0 : weights[k]) * row[k];
        out[p] = s;
    }
    return out;
}

PathMatrix gen_process(const ProcessSpec& spec, const RandomStream& stream, std::size_t paths, Exec exec) {
    validate(spec);
    const std::size_t T = spec.T;
    const std::size_t n = spec.coords;
    const bool temporal_dep = spec.temporal.kind != CopulaKind::independence;
    const bool spatial_dep = spec.spatial.kind != CopulaKind::independence;
    const CopulaSpec temporal = temporal_dep ? spec.temporal : CopulaSpec::independence(T);
    const CopulaSpec spatial = spatial_dep ? spec.spatial : CopulaSpec::independence(n);
    const CopulaSampler by_time(temporal);
    const CopulaSampler by_coord(spatial);

    PathMatrix out{T, n, paths, std::vector<double>(paths * T * n)};
    for_each_index(exec, paths, [&](std::size_t p) {
        RandomStream s = stream.substream(p);
        double* block = &out.values[p * T * n];
        std::vector<double> buf(std::max(T, n));
        if (temporal_dep && spatial_dep) {
            // Separable Gaussian: correlate each column in time, then each row across coordinates.
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t t = 0; t < T; ++t) block[t * n + i] = s.normal();
            for (std::size_t i = 0; i < n; ++i) gaussian_correlate(temporal, block + i, n);
            for (std::size_t t = 0; t < T; ++t) gaussian_correlate(spatial, block + t * n, 1);
            for (std::size_t k = 0; k < T * n; ++k) block[k] = uniform_from_normal(block[k]);
        } else if (spatial_dep) {
            for (std::size_t t = 0; t < T; ++t) by_coord.draw(s, block + t * n);
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                by_time.draw(s, buf.data());
                for (std::size_t t = 0; t < T; ++t) block[t * n + i] = buf[t];
            }
        }
        for (std::size_t t = 0; t < T; ++t)
            for (std::size_t i = 0; i < n; ++i)
                block[t * n + i] = quantile(spec.marginal(t, i), block[t * n + i]);
    });
    return out;
}

namespace {

// Certificate for lo <=sm hi on one axis of dimension d, or empty when none applies.
std::string axis_certificate(const CopulaSpec& lo, const CopulaSpec& hi, std::size_t d) {
    const bool lo_ind = lo.kind == CopulaKind::independence;
    const bool hi_ind = hi.kind == CopulaKind::independence;
    if (lo == hi || (lo_ind && hi_ind)) return "identical copula";
    if (hi.kind == CopulaKind::comonotone) return "comonotone upper bound";
    if (lo.kind == CopulaKind::countermonotone && d == 2) return "countermonotone lower bound (dim 2)";
    if (is_gaussian_family(lo) && is_gaussian_family(hi)) {
        const CopulaSpec a = lo_ind ? CopulaSpec::independence(d) : lo;
        const CopulaSpec b = hi_ind ? CopulaSpec::independence(d) : hi;
        for (std::size_t lag = 1; lag < d; ++lag) {
            if (gaussian_corr_at_lag(a, lag) > gaussian_corr_at_lag(b, lag) + 1e-15) return {};
        }
        return "Gaussian correlations ordered elementwise (" + describe(lo) + " <= " + describe(hi) + ")";
    }
    return {};
}

std::string require_axis(const CopulaSpec& lo, const CopulaSpec& hi, std::size_t d, const std::string& axis) {
    std::string cert = axis_certificate(lo, hi, d);
    if (cert.empty())
        throw ParameterError("sm_pair: no supermodular certificate for " + axis + " copulas " +
                             describe(lo) + " vs " + describe(hi));
    return axis + ": " + cert;
}

} // namespace

SmPair sm_pair(const ProcessSpec& lo, const ProcessSpec& hi) {
    validate(lo);
    validate(hi);
    if (lo.T != hi.T || lo.coords != hi.coords)
        throw ContractError("sm_pair: processes have different shapes");
    for (std::size_t t = 0; t < lo.T; ++t)
        for (std::size_t i = 0; i < lo.coords; ++i)
            if (!(lo.marginal(t, i) == hi.marginal(t, i)))
                throw ContractError("sm_pair: marginals differ at t=" + std::to_string(t) +
                                    ", coord=" + std::to_string(i));

    SmPair pair{lo, hi, {}};
    const auto indep_t = CopulaSpec::independence(lo.T);
    const auto indep_s = CopulaSpec::independence(lo.coords);
    const bool lo_t = lo.temporal.kind != CopulaKind::independence;
    const bool lo_s = lo.spatial.kind != CopulaKind::independence;
    const bool hi_t = hi.temporal.kind != CopulaKind::independence;
    const bool hi_s = hi.spatial.kind != CopulaKind::independence;

    if ((lo_t && lo_s) || (hi_t && hi_s)) {
        // Separable Gaussian covariance is the Kronecker product; compare every entry.
        for (std::size_t lag = 0; lag < lo.T; ++lag)
            for (std::size_t k = 0; k < lo.coords; ++k) {
                if (lag == 0 && k == 0) continue;
                const double a = gaussian_corr_at_lag(lo_t ? lo.temporal : indep_t, lag) *
                                 gaussian_corr_at_lag(lo_s ? lo.spatial : indep_s, k);
                const double b = gaussian_corr_at_lag(hi_t ? hi.temporal : indep_t, lag) *
                                 gaussian_corr_at_lag(hi_s ? hi.spatial : indep_s, k);
                if (a > b + 1e-15)
                    throw ParameterError("sm_pair: separable Gaussian correlations are not ordered");
            }
        pair.certificates.push_back("separable Gaussian correlations ordered elementwise");
        return pair;
    }
    if (!lo_s && !hi_s) {
        pair.certificates.push_back(require_axis(lo.temporal, hi.temporal, lo.T, "temporal"));
    } else if (!lo_t && !hi_t) {
        pair.certificates.push_back(require_axis(lo.spatial, hi.spatial, lo.coords, "spatial"));
    } else {
        // Dependent on different axes: chain through the i.i.d. process.
        pair.certificates.push_back(lo_t ? require_axis(lo.temporal, indep_t, lo.T, "temporal")
                                         : require_axis(lo.spatial, indep_s, lo.coords, "spatial"));
        pair.certificates.push_back(hi_t ? require_axis(indep_t, hi.temporal, lo.T, "temporal")
                                         : require_axis(indep_s, hi.spatial, lo.coords, "spatial"));
    }
    return pair;
}

} // namespace depctl
