#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>

namespace xpqc {

inline constexpr const char* kVersion = "0.1.0";

/// Stateless 64-bit mixer (splitmix64 finalizer). Used to derive independent
/// RNG streams from (seed, index, salt) tuples so that results never depend
/// on thread count or iteration order.
std::uint64_t mix64(std::uint64_t x);

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                          std::uint64_t b = 0, std::uint64_t c = 0);

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t a = 0,
                         std::uint64_t b = 0, std::uint64_t c = 0);

/// Cheap per-trajectory stream (splitmix64). Construction is one mix, which
/// matters when millions of short-lived streams are derived.
class SmallRng {
 public:
  explicit SmallRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// uniform in [0, 1)
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

/// Worker-pool parallelism. 0 = resolve from the global setting
/// (set_max_threads / XTALK_PQC_THREADS / hardware_concurrency).
void set_max_threads(unsigned n);
unsigned resolved_threads(unsigned requested = 0);

/// Runs fn(i) for i in [0, n). Work is split in fixed contiguous chunks so
/// any per-index output slot assignment is deterministic.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  unsigned threads = 0);

/// Shortest decimal string that round-trips the double (for byte-stable CSV/JSON).
std::string format_double(double v);

}  // namespace xpqc
