// Reproducible random streams and a small work-sharing loop.
//
// Every random quantity is addressed by (seed, stream, block). Each address
// seeds its own mt19937_64 through std::seed_seq, so a block can be generated
// by any worker in any order and still produce the same numbers.
#pragma once

#include "sobolev_lab/core.hpp"

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

namespace sobolev_lab {

inline std::mt19937_64 block_engine(std::uint64_t seed, std::uint64_t stream, std::uint64_t block) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32)};
  return std::mt19937_64(seq);
}

/// Uniform in (0, 1]: 53 random bits, shifted away from zero.
inline double open_unit(std::mt19937_64& eng) {
  return (static_cast<double>(eng() >> 11) + 1.0) * 0x1.0p-53;
}

/// Unbiased draw from [0, n) by rejection; n > 0.
inline std::uint64_t uniform_below(std::mt19937_64& eng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t r;
  do r = eng();
  while (r >= limit);
  return r % n;
}

/// Fisher–Yates. std::shuffle would do, but its output differs between standard libraries.
template <class T>
void portable_shuffle(std::vector<T>& v, std::mt19937_64& eng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_below(eng, i)]);
}

/// Box–Muller pairs; the spare value is cached.
class GaussianSource {
 public:
  explicit GaussianSource(std::mt19937_64 eng) : eng_(std::move(eng)) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(open_unit(eng_)));
    const double phase = 2.0 * kPi * open_unit(eng_);
    spare_ = r * std::sin(phase);
    has_spare_ = true;
    return r * std::cos(phase);
  }

  void fill(Vector& out) {
    for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = next();
  }

  Vector vector(Eigen::Index n) {
    Vector v(n);
    fill(v);
    return v;
  }

  double uniform() { return open_unit(eng_); }
  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline GaussianSource gaussian_stream(std::uint64_t seed, std::uint64_t stream, std::uint64_t block = 0) {
  return GaussianSource(block_engine(seed, stream, block));
}

/// Worker count: explicit request, else SOBOLEV_LAB_THREADS, else hardware.
inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SOBOLEV_LAB_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

/// Runs fn(i) for i in [0, n) on up to `threads` workers. The first exception
/// thrown by any task is rethrown on the caller's thread.
template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& fn) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned t = 0; t < workers; ++t) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace sobolev_lab
