#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace tomo {

inline int effective_threads(int threads) {
  if (threads > 0) return threads;
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// Fixed chunk size used by every parallel reduction. Chunk boundaries
// depend only on the item count, so partial results (combined in chunk
// order by the caller) are bit-identical for any thread count.
inline constexpr std::size_t kReductionChunk = 4096;

// Applies fn(begin, end) to each chunk of [0, n) and returns the
// per-chunk results in chunk order.
template <typename T, typename Fn>
std::vector<T> map_chunks(std::size_t n, int threads, Fn fn) {
  const std::size_t n_chunks = (n + kReductionChunk - 1) / kReductionChunk;
  std::vector<T> out(n_chunks);
  const int nt = effective_threads(threads);
  if (nt <= 1 || n_chunks <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) {
      std::size_t b = c * kReductionChunk;
      out[c] = fn(b, std::min(n, b + kReductionChunk));
    }
    return out;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::size_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      std::size_t b = c * kReductionChunk;
      out[c] = fn(b, std::min(n, b + kReductionChunk));
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < nt - 1; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace tomo
