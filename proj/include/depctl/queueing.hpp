#pragma once

#include "depctl/channel.hpp"
#include "depctl/dependence.hpp"
#include "depctl/parallel.hpp"
#include "depctl/random_stream.hpp"

#include <cstddef>
#include <cstdint>
#include <variant>
#include <vector>

namespace depctl {

/// B_t = max(B_{t-1} + a_t - s_t, 0) with B_0 = 0; returns B_1..B_T.
std::vector<double> lindley(const std::vector<double>& a, const std::vector<double>& s);

struct DelayPath {
    std::vector<std::size_t> delay;
    /// Set where no departure covered the arrival before the horizon; the
    /// delay is then the remaining slot count, a lower bound.
    std::vector<std::uint8_t> censored;
};

/// Virtual delay of the last bit arriving in slot t: the smallest d with
/// A(t) <= A(t+d) - B(t+d), i.e. cumulative departures catching up with
/// cumulative arrivals.
DelayPath delay_path(const std::vector<double>& a, const std::vector<double>& s);

/// Service driven by a fading channel: s_t = slot_duration * C_t with the
/// SNR scaled by kappa. Each entry magnitude follows `temporal` over the
/// slots; phases are i.i.d.
struct ChannelService {
    ChannelModel model;
    CapacityParams params;
    double kappa = 1.0;
    double slot_duration = 1.0;
    CopulaSpec temporal = CopulaSpec::independence(1);
};

struct QueueConfig {
    ProcessSpec arrival;  // one coordinate, bits per slot
    std::variant<ProcessSpec, ChannelService> service;
    std::size_t T = 1;
    std::size_t paths = 200;
};

void validate(const QueueConfig& config);

/// Arrivals and services for every path, index p * T + t. Path p draws
/// arrivals from stream.derive("arrival").substream(p) and service from
/// stream.derive("service").substream(p), so configs run on one stream share
/// their random numbers.
struct QueueInputs {
    std::size_t T = 0;
    std::size_t paths = 0;
    std::vector<double> arrivals;
    std::vector<double> services;
};

QueueInputs simulate_inputs(const QueueConfig& config, const RandomStream& stream, Exec exec = Exec::parallel);

struct QuantileEstimate {
    double level = 0.0;
    double value = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
};

struct BacklogStats {
    std::size_t T = 0;
    std::size_t paths = 0;
    std::size_t warmup = 0;
    std::vector<double> per_slot_mean;
    std::vector<QuantileEstimate> quantiles;  // levels 0.5, 0.9, 0.99
    std::vector<double> x_grid;
    std::vector<double> exceedance;
    std::vector<double> exceedance_lo;
    std::vector<double> exceedance_hi;
    double mean = 0.0;
    double mean_se = 0.0;
    double mean_arrival = 0.0;
    double mean_service = 0.0;
    double delay_mean = 0.0;
    double delay_mean_se = 0.0;
    double censored_fraction = 0.0;
    /// mean arrival >= mean service.
    bool unstable = false;
    /// Second half of the stationary window exceeds the first by more than 4 se.
    bool nonstationary = false;
};

/// Requires at least 200 paths; the first 20% of slots are warmup.
BacklogStats backlog_stats(const QueueConfig& config, const RandomStream& stream, Exec exec = Exec::parallel);
BacklogStats backlog_stats(const QueueInputs& inputs, const RandomStream& bootstrap_stream,
                           Exec exec = Exec::parallel);

struct PowerTradeReport {
    double q = 0.99;
    double kappa_ref = 1.0;
    double kappa_star = 1.0;
    double saving = 0.0;  // 1 - kappa_star / kappa_ref
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    double target_quantile = 0.0;
    double matched_quantile = 0.0;
    std::vector<double> batch_savings;
    /// The negative-dependence config needs kappa >= kappa_ref (no crossing in [0.05, 1] kappa_ref).
    bool no_crossing = false;
    /// kappa_star was clamped to the search interval.
    bool at_boundary = false;
};

/// Finds the power scale at which `neg` matches the q-quantile of the
/// stationary backlog of `ref` at its own kappa. Both configs must be
/// channel-driven and identical except for the service temporal copula.
PowerTradeReport power_tradeoff(const QueueConfig& neg, const QueueConfig& ref, double q, double tolerance,
                                const RandomStream& stream, Exec exec = Exec::parallel, std::size_t batches = 10);

} // namespace depctl
