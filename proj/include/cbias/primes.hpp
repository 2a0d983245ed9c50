#pragma once

/// @file primes.hpp
/// @brief Segmented prime engine: ordered, deterministic streaming of primes.
///
/// The sieve works on odd numbers only; 2 is emitted specially. Segments are
/// sieved concurrently (OpenMP) in batches of `thread_count` and delivered to
/// the consumer strictly in ascending order, so downstream floating-point
/// accumulation is bit-reproducible for any thread count.

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace cbias::primes {

using u64 = std::uint64_t;

inline constexpr u64 kMaxLimit = u64{1} << 40;
inline constexpr u64 kDefaultSegmentSize = u64{1} << 22;

/// Raised when a caller breaks a documented precondition.
struct ContractViolation : std::logic_error {
    using std::logic_error::logic_error;
};

struct SieveConfig {
    u64 limit = 2;                          ///< inclusive upper bound
    u64 segment_size = kDefaultSegmentSize; ///< odd-number bits per segment
    unsigned thread_count = 1;
    /// Resume point. Must be 0 or a segment boundary (multiple of 2*segment_size).
    u64 start = 0;

    /// Span of integers covered by one segment.
    u64 segment_span() const { return 2 * segment_size; }
    void validate() const;
};

/// Primes in [lo, hi) as an odd-only bitmap (bit i <-> lo_odd + 2i), plus 2.
class SegmentBitmap {
public:
    SegmentBitmap() = default;
    SegmentBitmap(u64 lo, u64 hi);

    u64 lo() const { return lo_; }
    u64 hi() const { return hi_; }
    bool contains_two() const { return lo_ <= 2 && hi_ > 2; }
    bool is_prime(u64 n) const;
    u64 count() const;
    std::vector<u64> primes() const;

    /// Equality is bit-for-bit over the covered range.
    bool operator==(const SegmentBitmap&) const = default;

private:
    friend SegmentBitmap sieve_segment(u64, u64, std::span<const u64>);
    u64 lo_ = 0;
    u64 hi_ = 0;
    u64 first_odd_ = 1;   // smallest odd number >= max(lo, 3)
    u64 bit_count_ = 0;   // odd numbers in [first_odd_, hi)
    std::vector<u64> words_;
};

/// All primes <= n by a plain sieve (used for base primes).
std::vector<u64> small_primes(u64 n);

/// floor(sqrt(n)) exactly.
u64 isqrt(u64 n);

/// Sieve [lo, hi). `base_primes` must hold every prime <= sqrt(hi - 1).
/// Throws ContractViolation otherwise.
SegmentBitmap sieve_segment(u64 lo, u64 hi, std::span<const u64> base_primes);

/// Serial, unsegmented reference sieve. Kept for testing and benchmarking.
std::vector<u64> reference_sieve(u64 limit);

/// Sieves a batch of consecutive segments concurrently and returns the primes
/// of each segment in order. `first` is the index of the first segment.
std::vector<std::vector<u64>> sieve_batch(const SieveConfig& config,
                                          std::span<const u64> base_primes,
                                          u64 first, u64 count);

/// Number of segments needed to cover [start, limit].
u64 segment_count(const SieveConfig& config);

/// Streams every prime p with start <= p <= limit to `consumer(p)` in
/// ascending order. After each segment is delivered, `on_boundary(hi)` is
/// called with the exclusive upper end of that segment (checkpoint hook).
/// Returns the consumer, which doubles as the fold state.
template <typename Consumer, typename BoundaryHook>
Consumer stream_primes(const SieveConfig& config, Consumer consumer, BoundaryHook&& on_boundary) {
    if (config.limit < 2) return consumer;
    config.validate();
    const auto base = small_primes(isqrt(config.limit));
    const u64 total = segment_count(config);
    const u64 batch = config.thread_count;
    for (u64 first = 0; first < total; first += batch) {
        const u64 n = std::min(batch, total - first);
        const auto segments = sieve_batch(config, base, first, n);
        for (u64 k = 0; k < n; ++k) {
            for (u64 p : segments[k]) consumer(p);
            const u64 hi = std::min(config.start + (first + k + 1) * config.segment_span(),
                                    config.limit + 1);
            on_boundary(hi);
        }
    }
    return consumer;
}

template <typename Consumer>
Consumer stream_primes(const SieveConfig& config, Consumer consumer) {
    return stream_primes(config, std::move(consumer), [](u64) {});
}

/// pi(limit) through the streaming engine.
u64 count_primes(const SieveConfig& config);

/// Geometric checkpoint grid.
struct CheckpointGrid {
    u64 x_min = 0;
    u64 x_max = 0;
    double ratio = 1.05;
    std::vector<u64> points;
};

/// Points x_min * ratio^k (rounded, deduplicated), closed by x_max.
/// Throws std::invalid_argument unless 2 <= x_min < x_max and ratio > 1.
CheckpointGrid make_grid(u64 x_min, u64 x_max, double ratio);

/// Grid with explicitly given points (sorted, strictly increasing).
CheckpointGrid make_grid_from_points(std::vector<u64> points);

}  // namespace cbias::primes
