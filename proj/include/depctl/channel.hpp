#pragma once

#include "depctl/complex_matrix.hpp"
#include "depctl/distributions.hpp"
#include "depctl/parallel.hpp"
#include "depctl/random_stream.hpp"

#include <cstddef>
#include <vector>

namespace depctl {

enum class Csit { unknown, known };

struct CapacityParams {
    double W = 1.0;    // bandwidth, Hz
    double rho = 1.0;  // SNR P/(N0 W)
    int n_t = 1;       // transmit antennas (power split)
    Csit csit = Csit::unknown;
};

void validate(const CapacityParams& params);

struct CapacitySample {
    double c = 0.0;  // bits/s
    double lambda_max = 0.0;
    double trace = 0.0;
    double power = 1.0;
};

/// Random MIMO channel: i.i.d. entries with magnitude `entry_law` and uniform
/// phase. `subchannels` > 1 draws that many independent blocks per period
/// (frequency-selective, block-diagonal gram).
struct ChannelModel {
    int n_r = 1;
    int n_t = 1;
    DistributionSpec entry_law = DistributionSpec::rayleigh(1.0 / 1.4142135623730951);
    bool normalize = false;
    int subchannels = 1;
};

void validate(const ChannelModel& model);

/// Eigenmode power allocation maximizing sum log(1 + snr*g_i*lambda_i)
/// subject to sum g_i = budget, g_i >= 0. Eigenvalues below the rank
/// threshold receive zero power.
std::vector<double> waterfill(const std::vector<double>& lambda, double snr, double budget);

/// Count of eigenvalues above 1e-9 * max eigenvalue.
std::size_t numerical_rank(const std::vector<double>& lambda);

/// Capacity from the pooled eigenvalues of N subchannel grams:
/// (W/N) sum log2(1 + (rho/N_T) g_i lambda_i), with g = 1 (unknown CSIT)
/// or waterfilled over all eigenvalues with budget N_T * N (known CSIT).
double capacity_from_spectrum(const std::vector<double>& lambda, const CapacityParams& params,
                              std::size_t subchannels);

CapacitySample capacity_flat(const ComplexMatrix& h, const CapacityParams& params);
CapacitySample capacity_freq_selective(const std::vector<ComplexMatrix>& blocks,
                                       const CapacityParams& params);

/// |log det(I + z Lambda) - sum_{k<=K} (-1)^{k+1} z^k Tr[Lambda^k] / k|.
double logdet_series_check(const std::vector<double>& eigenvalues, double z, int K);

/// Entry scale making E|H_ij|^2 = 1, estimated from 1e5 deterministic
/// calibration draws and cached per law. Thread-safe.
double normalization_factor(const DistributionSpec& entry_law);

/// One channel realization (a single block).
ComplexMatrix draw_channel_block(const ChannelModel& model, double entry_scale,
                                 RandomStream& stream);

/// Per-period draws with the pooled gram eigenvalues retained.
struct CapacityBatch {
    std::vector<CapacitySample> samples;
    std::vector<double> eigenvalues;  // stride = n_r * subchannels, ascending per block
    std::size_t stride = 0;
};

/// n i.i.d. coherence periods. Period j uses stream.substream(j); the
/// power draw scales rho. Nonpositive power draws are redrawn; more than
/// 0.1% rejections raises ParameterError.
CapacityBatch sample_capacity_batch(const ChannelModel& model, const DistributionSpec& power_law,
                                    const CapacityParams& params, const RandomStream& stream,
                                    std::size_t n, Exec exec = Exec::parallel);

std::vector<CapacitySample> sample_capacity(const ChannelModel& model,
                                            const DistributionSpec& power_law,
                                            const CapacityParams& params,
                                            const RandomStream& stream, std::size_t n,
                                            Exec exec = Exec::parallel);

} // namespace depctl
