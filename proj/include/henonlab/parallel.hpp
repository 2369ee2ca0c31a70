// SPDX-License-Identifier: Apache-2.0
// Worker pool with deterministic map-reduce: work splits into chunks whose
// boundaries depend only on the problem size, each chunk writes its own
// slot, and slots merge along a fixed pairwise tree. Results are therefore
// byte-stable across thread counts.

#pragma once

#include <atomic>
#include <condition_variable>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace henonlab {

class ThreadPool {
 public:
  explicit ThreadPool(unsigned threads = 0)
      : nthreads_(threads ? threads : std::max(1u, std::thread::hardware_concurrency())) {}

  unsigned size() const { return nthreads_; }

  /// body(chunk_index, begin, end); chunks are [k*grain, min((k+1)*grain, n)).
  void for_chunks(std::size_t n, std::size_t grain,
                  const std::function<void(std::size_t, std::size_t, std::size_t)>& body) const {
    if (n == 0) return;
    if (grain == 0) grain = 1;
    std::size_t nchunks = (n + grain - 1) / grain;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (;;) {
        std::size_t k = next.fetch_add(1);
        if (k >= nchunks) return;
        std::size_t b = k * grain;
        std::size_t e = std::min(n, b + grain);
        body(k, b, e);
      }
    };
    unsigned helpers = std::min<std::size_t>(nthreads_ - 1, nchunks > 0 ? nchunks - 1 : 0);
    std::vector<std::thread> ts;
    ts.reserve(helpers);
    for (unsigned i = 0; i < helpers; ++i) ts.emplace_back(worker);
    worker();
    for (auto& t : ts) t.join();
  }

  void parallel_for(std::size_t n, std::size_t grain,
                    const std::function<void(std::size_t, std::size_t)>& body) const {
    for_chunks(n, grain, [&](std::size_t, std::size_t b, std::size_t e) { body(b, e); });
  }

 private:
  unsigned nthreads_;
};

/// Fixed-topology pairwise fold; the tree depends only on slots.size().
template <class T, class Combine>
T pairwise_fold(std::vector<T> slots, Combine&& comb, T empty = T{}) {
  if (slots.empty()) return empty;
  while (slots.size() > 1) {
    std::size_t half = slots.size() / 2;
    for (std::size_t i = 0; i < half; ++i) slots[i] = comb(slots[2 * i], slots[2 * i + 1]);
    if (slots.size() % 2) {
      slots[half] = slots.back();
      slots.resize(half + 1);
    } else {
      slots.resize(half);
    }
  }
  return slots[0];
}

/// Deterministic sum of a range via recursive halving.
inline double pairwise_sum(const double* v, std::size_t n) {
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  std::size_t half = n / 2;
  return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

inline double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

template <class T, class Map, class Combine>
T parallel_map_reduce(const ThreadPool& pool, std::size_t n, std::size_t grain, Map&& map_chunk,
                      Combine&& comb, T empty = T{}) {
  if (n == 0) return empty;
  if (grain == 0) grain = 1;
  std::size_t nchunks = (n + grain - 1) / grain;
  std::vector<T> slots(nchunks, empty);
  pool.for_chunks(n, grain, [&](std::size_t k, std::size_t b, std::size_t e) {
    slots[k] = map_chunk(b, e);
  });
  return pairwise_fold(std::move(slots), comb, empty);
}

}  // namespace henonlab
