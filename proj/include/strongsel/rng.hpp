// =============================================================================
// rng.hpp — Deterministic per-replicate random streams.
//
// Stream k of master seed s is an mt19937_64 seeded with splitmix64 applied
// to (s, k).  Replicate work is assigned by index, so results do not depend
// on the number of worker threads.
// =============================================================================
#pragma once

#include <cstdint>
#include <random>
#include <thread>
#include <vector>

namespace strongsel {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// mt19937_64 stream derived from (seed, stream index).
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ (stream + 1)));
}

/// Runs fn(replicate_index) for indices [0, count) on up to `threads`
/// workers.  fn must write only to its own replicate's slot.
template <typename Fn>
void parallel_replicates(std::size_t count, unsigned threads, Fn&& fn) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t r = 0; r < count; ++r) fn(r);
        return;
    }
    unsigned n = std::min<std::size_t>(threads, count);
    std::vector<std::thread> pool;
    pool.reserve(n);
    for (unsigned t = 0; t < n; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t r = t; r < count; r += n) fn(r);
        });
    }
    for (auto& th : pool) th.join();
}

inline unsigned default_threads() {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1u : n;
}

/// Streaming mean / variance (Welford).
class RunningStats {
  public:
    void add(double x) {
        ++n_;
        double delta = x - mean_;
        mean_ += delta / static_cast<double>(n_);
        m2_ += delta * (x - mean_);
    }
    std::size_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    double stderror() const {
        return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
    }

  private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

}  // namespace strongsel
