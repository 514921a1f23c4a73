#include "xpqc/common.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <thread>
#include <vector>

namespace xpqc {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                          std::uint64_t c) {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ a);
  h = mix64(h ^ b);
  h = mix64(h ^ c);
  return h;
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                         std::uint64_t c) {
  return std::mt19937_64(derive_seed(seed, a, b, c));
}

namespace {
std::atomic<unsigned> g_max_threads{0};

unsigned env_threads() {
  const char* env = std::getenv("XTALK_PQC_THREADS");
  if (!env || *env == '\0') return 0;
  long v = std::strtol(env, nullptr, 10);
  return v > 0 ? static_cast<unsigned>(v) : 0;
}
}  // namespace

void set_max_threads(unsigned n) { g_max_threads.store(n); }

unsigned resolved_threads(unsigned requested) {
  if (requested > 0) return requested;
  unsigned g = g_max_threads.load();
  if (g > 0) return g;
  unsigned e = env_threads();
  if (e > 0) return e;
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  unsigned threads) {
  if (n == 0) return;
  unsigned t = resolved_threads(threads);
  if (t > n) t = static_cast<unsigned>(n);
  if (t <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> workers;
  workers.reserve(t);
  std::size_t chunk = (n + t - 1) / t;
  for (unsigned w = 0; w < t; ++w) {
    std::size_t lo = static_cast<std::size_t>(w) * chunk;
    std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    workers.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& w : workers) w.join();
}

std::string format_double(double v) {
  char buf[64];
  // shortest representation that round-trips
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    double back = std::strtod(buf, nullptr);
    if (back == v) return buf;
  }
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace xpqc
