#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

namespace depctl {

/// 64-bit FNV-1a over a byte string, continuing from `basis`.
std::uint64_t fnv1a64(std::string_view bytes,
                      std::uint64_t basis = 0xcbf29ce484222325ULL) noexcept;

/// Counter-based random stream (Philox4x32-10).
///
/// A stream is identified by a 64-bit key derived from (master_seed, label)
/// and walks a 128-bit block counter. Two streams with different keys are
/// statistically independent; the same (seed, label) pair always replays
/// the same sequence. Child streams are derived by label (`derive`) or by
/// integer index (`substream`) without touching the parent's counter, so
/// parallel workers can each own a stream that does not depend on
/// scheduling.
///
/// Satisfies UniformRandomBitGenerator so it can drive Boost.Random
/// distributions.
class RandomStream {
public:
    using result_type = std::uint64_t;

    RandomStream(std::uint64_t master_seed, std::string_view label);

    RandomStream derive(std::string_view label) const;
    RandomStream substream(std::uint64_t index) const;

    std::uint64_t next_u64();
    result_type operator()() { return next_u64(); }
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    /// Uniform on the open interval (0, 1).
    double uniform();
    /// Standard normal (Box-Muller, pairs cached).
    double normal();
    /// Standard exponential.
    double exponential();
    /// Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound);

    std::uint64_t master_seed() const noexcept { return master_seed_; }
    const std::string& label() const noexcept { return label_; }
    std::uint64_t key() const noexcept { return key_; }
    /// Number of 128-bit blocks consumed so far (low 64 bits of the counter).
    std::uint64_t blocks_consumed() const noexcept;

private:
    RandomStream(std::uint64_t master_seed, std::string label, std::uint64_t key);
    void refill();

    std::uint64_t master_seed_;
    std::string label_;
    std::uint64_t key_;
    std::array<std::uint32_t, 4> counter_{};
    std::array<std::uint64_t, 2> buffer_{};
    int buffered_ = 0;
    bool has_spare_normal_ = false;
    double spare_normal_ = 0.0;
};

} // namespace depctl
