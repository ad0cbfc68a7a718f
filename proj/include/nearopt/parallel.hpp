#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace nearopt {

inline int default_threads() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

inline int resolve_threads(int requested) {
  return requested > 0 ? requested : default_threads();
}

// Runs fn(chunk_index, begin, end) over [0, n) split into fixed-size chunks.
// Chunk boundaries depend only on (n, chunk_size), never on the worker count,
// so per-chunk results merged in chunk order reproduce exactly.
template <class Fn>
void parallel_chunks(std::size_t n, std::size_t chunk_size, int threads, Fn&& fn) {
  if (n == 0) return;
  if (chunk_size == 0) chunk_size = 1;
  const std::size_t n_chunks = (n + chunk_size - 1) / chunk_size;
  const int workers = std::min<std::size_t>(resolve_threads(threads), n_chunks);
  if (workers <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) {
      fn(c, c * chunk_size, std::min(n, (c + 1) * chunk_size));
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1, std::memory_order_relaxed);
      if (c >= n_chunks) return;
      try {
        fn(c, c * chunk_size, std::min(n, (c + 1) * chunk_size));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers) - 1);
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// Map-reduce over chunks with a left fold in chunk order.
template <class R, class Map, class Reduce>
R parallel_map_reduce(std::size_t n, std::size_t chunk_size, int threads, R init, Map&& map,
                      Reduce&& reduce) {
  if (n == 0) return init;
  if (chunk_size == 0) chunk_size = 1;
  const std::size_t n_chunks = (n + chunk_size - 1) / chunk_size;
  std::vector<R> partials(n_chunks, init);
  parallel_chunks(n, chunk_size, threads, [&](std::size_t c, std::size_t lo, std::size_t hi) {
    partials[c] = map(lo, hi);
  });
  R acc = std::move(init);
  for (auto& part : partials) acc = reduce(std::move(acc), std::move(part));
  return acc;
}

}  // namespace nearopt
