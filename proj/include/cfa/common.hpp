#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <thread>
#include <vector>

namespace cfa {

/// Stateless mixing function used everywhere a seed has to be derived from
/// another seed. Streams derived through distinct tag sequences are
/// independent for all practical purposes and, crucially, reproducible.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed-splitting rule: fold each tag into the state with one splitmix64
/// round. derive_seed(s, {a, b}) != derive_seed(s, {b, a}) in general, so
/// tag order is part of the contract.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> tags) {
  std::uint64_t s = splitmix64(master);
  for (std::uint64_t t : tags) s = splitmix64(s ^ t);
  return s;
}

/// Neumaier-compensated accumulator. Sums taken in a fixed index order with
/// this accumulator are reproducible and insensitive to magnitude ordering
/// well below 1e-10 relative error.
class CompensatedSum {
 public:
  void add(double v) {
    double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Static block partition of [0, n) over at most `threads` workers. Results
/// must be written to per-index slots; the partition (not the scheduler)
/// decides who computes what, so output is independent of thread timing.
inline void parallel_for(std::size_t n, unsigned threads,
                         const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  unsigned hw = threads == 0 ? std::thread::hardware_concurrency() : threads;
  if (hw <= 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  unsigned workers = static_cast<unsigned>(std::min<std::size_t>(hw, n));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace cfa
