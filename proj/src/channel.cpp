#include "depctl/channel.hpp"

#include "depctl/errors.hpp"
#include "depctl/hermitian_eigen.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

namespace depctl {

namespace {

double log2_1p(double x) { return std::log1p(x) / std::numbers::ln2; }

std::string exact_key(const DistributionSpec& s) {
    std::string key = family_name(s.family);
    for (double v : {s.p1, s.p2, s.shift, s.scale}) {
        char buf[sizeof(double)];
        std::memcpy(buf, &v, sizeof v);
        key.append(buf, sizeof buf);
    }
    return key;
}

} // namespace

void validate(const CapacityParams& p) {
    if (!(p.W > 0.0) || !std::isfinite(p.W)) throw ParameterError("capacity: W must be positive");
    if (!(p.rho > 0.0) || !std::isfinite(p.rho)) throw ParameterError("capacity: rho must be positive");
    if (p.n_t < 1) throw ParameterError("capacity: n_t must be at least 1");
}

void validate(const ChannelModel& m) {
    if (m.n_r < 1 || m.n_t < 1) throw ParameterError("channel: antenna counts must be at least 1");
    if (m.subchannels < 1) throw ParameterError("channel: subchannels must be at least 1");
    validate(m.entry_law);
}

std::size_t numerical_rank(const std::vector<double>& lambda) {
    if (lambda.empty()) return 0;
    const double lmax = *std::max_element(lambda.begin(), lambda.end());
    if (!(lmax > 0.0)) return 0;
    return static_cast<std::size_t>(std::count_if(
        lambda.begin(), lambda.end(), [&](double l) { return l > 1e-9 * lmax; }));
}

std::vector<double> waterfill(const std::vector<double>& lambda, double snr, double budget) {
    std::vector<double> gamma(lambda.size(), 0.0);
    if (lambda.empty() || !(budget > 0.0)) return gamma;
    const double lmax = *std::max_element(lambda.begin(), lambda.end());
    if (!(lmax > 0.0)) return gamma;

    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < lambda.size(); ++i)
        if (lambda[i] > 1e-9 * lmax) active.push_back(i);
    std::stable_sort(active.begin(), active.end(),
                     [&](std::size_t a, std::size_t b) { return lambda[a] > lambda[b]; });

    // Largest k whose water level clears the k-th floor 1/(snr*lambda).
    std::vector<double> prefix(active.size() + 1, 0.0);
    for (std::size_t i = 0; i < active.size(); ++i)
        prefix[i + 1] = prefix[i] + 1.0 / (snr * lambda[active[i]]);
    double level = 0.0;
    std::size_t k = active.size();
    for (; k >= 1; --k) {
        level = (budget + prefix[k]) / static_cast<double>(k);
        if (level > 1.0 / (snr * lambda[active[k - 1]])) break;
    }
    for (std::size_t i = 0; i < k; ++i)
        gamma[active[i]] = std::max(0.0, level - 1.0 / (snr * lambda[active[i]]));
    return gamma;
}

double capacity_from_spectrum(const std::vector<double>& lambda_in, const CapacityParams& params,
                              std::size_t subchannels) {
    validate(params);
    if (subchannels < 1) throw ContractError("capacity: subchannel count must be positive");
    std::vector<double> lambda(lambda_in.size());
    for (std::size_t i = 0; i < lambda.size(); ++i) lambda[i] = std::max(0.0, lambda_in[i]);
    const double snr = params.rho / static_cast<double>(params.n_t);
    double total = 0.0;
    if (params.csit == Csit::unknown) {
        for (double l : lambda) total += log2_1p(snr * l);
    } else {
        const double budget = static_cast<double>(params.n_t) * static_cast<double>(subchannels);
        const auto g = waterfill(lambda, snr, budget);
        for (std::size_t i = 0; i < lambda.size(); ++i) total += log2_1p(snr * g[i] * lambda[i]);
    }
    return params.W / static_cast<double>(subchannels) * total;
}

CapacitySample capacity_freq_selective(const std::vector<ComplexMatrix>& blocks,
                                       const CapacityParams& params) {
    if (blocks.empty()) throw ContractError("capacity_freq_selective: empty block list");
    validate(params);
    const std::size_t r = blocks.front().rows();
    const std::size_t c = blocks.front().cols();
    CapacitySample out;
    std::vector<double> pooled;
    pooled.reserve(r * blocks.size());
    for (const auto& h : blocks) {
        if (h.rows() != r || h.cols() != c)
            throw ContractError("capacity_freq_selective: blocks differ in shape");
        if (h.is_zero()) {
            pooled.insert(pooled.end(), r, 0.0);
            continue;
        }
        const auto g = gram(h);
        const auto eig = eigen_hermitian(g);
        pooled.insert(pooled.end(), eig.eigenvalues.begin(), eig.eigenvalues.end());
        out.lambda_max = std::max(out.lambda_max, eig.eigenvalues.back());
        out.trace += g.trace_real();
    }
    out.c = capacity_from_spectrum(pooled, params, blocks.size());
    return out;
}

CapacitySample capacity_flat(const ComplexMatrix& h, const CapacityParams& params) {
    return capacity_freq_selective(std::vector<ComplexMatrix>{h}, params);
}

double logdet_series_check(const std::vector<double>& eigenvalues, double z, int K) {
    if (K < 1) throw ContractError("logdet_series_check: K must be at least 1");
    double lmax = 0.0;
    for (double l : eigenvalues) lmax = std::max(lmax, std::abs(l));
    if (std::abs(z) * lmax >= 1.0)
        throw DomainError("logdet_series_check: |z| * max eigenvalue must be below 1");
    double exact = 0.0;
    for (double l : eigenvalues) exact += std::log1p(z * l);
    double series = 0.0;
    for (int k = K; k >= 1; --k) {
        double tr = 0.0;
        for (double l : eigenvalues) tr += std::pow(z * l, k);
        series += ((k % 2 == 1) ? 1.0 : -1.0) * tr / k;
    }
    return std::abs(exact - series);
}

double normalization_factor(const DistributionSpec& entry_law) {
    validate(entry_law);
    static std::mutex mu;
    static std::map<std::string, double> cache;
    const std::string key = exact_key(entry_law);
    std::lock_guard<std::mutex> lock(mu);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    RandomStream calib(0x6e6f726d616c697aULL, "normalization/" + describe(entry_law));
    double s = 0.0;
    constexpr int kDraws = 100000;
    for (int i = 0; i < kDraws; ++i) {
        const double r = sample_one(entry_law, calib);
        s += r * r;
    }
    const double ms = s / kDraws;
    if (!(ms > 0.0) || !std::isfinite(ms))
        throw ParameterError("normalization: entry law has no finite positive second moment");
    const double f = 1.0 / std::sqrt(ms);
    cache.emplace(key, f);
    return f;
}

ComplexMatrix draw_channel_block(const ChannelModel& model, double entry_scale,
                                 RandomStream& stream) {
    ComplexMatrix h(static_cast<std::size_t>(model.n_r), static_cast<std::size_t>(model.n_t));
    for (std::size_t i = 0; i < h.rows(); ++i)
        for (std::size_t j = 0; j < h.cols(); ++j) {
            const double r = entry_scale * sample_one(model.entry_law, stream);
            const double phi = 2.0 * std::numbers::pi * stream.uniform();
            h(i, j) = cplx(r * std::cos(phi), r * std::sin(phi));
        }
    return h;
}

CapacityBatch sample_capacity_batch(const ChannelModel& model, const DistributionSpec& power_law,
                                    const CapacityParams& params, const RandomStream& stream,
                                    std::size_t n, Exec exec) {
    validate(model);
    validate(power_law);
    validate(params);
    if (n < 1) throw ContractError("sample_capacity: n must be at least 1");
    const double scale = model.normalize ? normalization_factor(model.entry_law) : 1.0;
    const auto nsub = static_cast<std::size_t>(model.subchannels);

    CapacityBatch out;
    out.stride = static_cast<std::size_t>(model.n_r) * nsub;
    out.samples.resize(n);
    out.eigenvalues.resize(n * out.stride);
    std::vector<unsigned> rejected(n, 0);

    for_each_index(exec, n, [&](std::size_t j) {
        RandomStream s = stream.substream(j);
        std::vector<ComplexMatrix> blocks;
        blocks.reserve(nsub);
        for (std::size_t b = 0; b < nsub; ++b) blocks.push_back(draw_channel_block(model, scale, s));
        double p = sample_one(power_law, s);
        while (!(p > 0.0) && rejected[j] < 64) {
            ++rejected[j];
            p = sample_one(power_law, s);
        }
        CapacityParams eff = params;
        eff.rho = params.rho * p;
        CapacitySample cs;
        double* eig_out = out.eigenvalues.data() + j * out.stride;
        for (std::size_t b = 0; b < nsub; ++b) {
            const auto g = gram(blocks[b]);
            if (blocks[b].is_zero()) {
                std::fill(eig_out + b * model.n_r, eig_out + (b + 1) * model.n_r, 0.0);
                continue;
            }
            const auto eig = eigen_hermitian(g);
            std::copy(eig.eigenvalues.begin(), eig.eigenvalues.end(), eig_out + b * model.n_r);
            cs.lambda_max = std::max(cs.lambda_max, eig.eigenvalues.back());
            cs.trace += g.trace_real();
        }
        if (p > 0.0 && std::isfinite(eff.rho)) {
            cs.c = capacity_from_spectrum(std::vector<double>(eig_out, eig_out + out.stride), eff,
                                          nsub);
        } else {
            cs.c = std::numeric_limits<double>::infinity();
        }
        cs.power = p;
        out.samples[j] = cs;
    });

    std::size_t total_rejected = 0;
    for (unsigned r : rejected) total_rejected += r;
    if (static_cast<double>(total_rejected) > 0.001 * static_cast<double>(n))
        throw ParameterError("sample_capacity: more than 0.1% of power draws were nonpositive");
    return out;
}

std::vector<CapacitySample> sample_capacity(const ChannelModel& model,
                                            const DistributionSpec& power_law,
                                            const CapacityParams& params,
                                            const RandomStream& stream, std::size_t n, Exec exec) {
    return sample_capacity_batch(model, power_law, params, stream, n, exec).samples;
}

} // namespace depctl
