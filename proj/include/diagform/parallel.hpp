#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace diagform {

// Worker count: DIAGFORM_THREADS if set to a positive integer, otherwise the
// hardware concurrency (at least 1).
inline unsigned thread_count() {
  if (const char* env = std::getenv("DIAGFORM_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Splits [0, n) into contiguous chunks and runs body(chunk_index, begin, end)
// on each. Chunk boundaries depend only on n and the chunk count, so callers
// that reduce per-chunk results in chunk order get deterministic output.
namespace detail {
inline thread_local bool inside_worker = false;
}

// Nested calls from inside a worker run serially on that worker.
template <class Body>
void parallel_chunks(std::size_t n, std::size_t chunks, Body&& body) {
  chunks = std::max<std::size_t>(1, std::min(chunks, n));
  if (n == 0) return;
  const unsigned workers = detail::inside_worker ? 1u : static_cast<unsigned>(std::min<std::size_t>(thread_count(), chunks));
  auto run_chunk = [&](std::size_t c) {
    const std::size_t begin = n * c / chunks;
    const std::size_t end = n * (c + 1) / chunks;
    body(c, begin, end);
  };
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      detail::inside_worker = true;
      for (std::size_t c = w; c < chunks; c += workers) {
        try {
          run_chunk(c);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace diagform
