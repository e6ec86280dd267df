#ifndef OTDA_PARALLEL_HPP
#define OTDA_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "otda/types.hpp"

namespace otda {

/// Runs body(i) for i in [0, n) across up to `jobs` threads, pulling
/// indices from a shared counter. The first exception captured is
/// rethrown on the calling thread after all workers finish. jobs <= 1
/// runs inline. Determinism is the caller's job: have body(i) write
/// only to slot i and reduce in index order afterwards.
template <typename F>
void parallel_for(Index n, int jobs, F&& body) {
  if (n <= 0) return;
  if (jobs <= 1 || n == 1) {
    for (Index i = 0; i < n; ++i) body(i);
    return;
  }
  const int workers = static_cast<int>(std::min<Index>(jobs, n));
  std::atomic<Index> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&]() {
      for (;;) {
        const Index i = next.fetch_add(1);
        if (i >= n) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace otda

#endif  // OTDA_PARALLEL_HPP
