#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace genseg {

inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

// Runs fn(block_index, begin, end) over fixed-size blocks of [0, n).
// Block boundaries depend only on n, never on the thread count, so any
// per-block results reduced in block order are identical for every
// thread count.
template <typename Fn>
void for_each_block(std::size_t n, std::size_t block_size, unsigned threads, Fn&& fn) {
  if (n == 0) return;
  const std::size_t n_blocks = (n + block_size - 1) / block_size;
  threads = resolve_threads(threads);
  if (threads <= 1 || n_blocks <= 1) {
    for (std::size_t b = 0; b < n_blocks; ++b)
      fn(b, b * block_size, std::min(n, (b + 1) * block_size));
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::size_t b = next.fetch_add(1);
      if (b >= n_blocks) break;
      fn(b, b * block_size, std::min(n, (b + 1) * block_size));
    }
  };
  std::vector<std::thread> pool;
  unsigned spawn = std::min<std::size_t>(threads, n_blocks);
  pool.reserve(spawn);
  for (unsigned i = 0; i < spawn; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

constexpr std::size_t kDefaultBlock = 1024;

}  // namespace genseg
