#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace menkf {

/// Runs body(i) for i in [0, n). With parallel=false, or a single worker,
/// this is a plain loop. Work items must not share mutable state; the first
/// exception thrown by any worker is rethrown on the caller.
template <typename Body>
void parallel_for(std::size_t n, bool parallel, unsigned threads, Body&& body) {
  unsigned workers = threads != 0 ? threads : std::thread::hardware_concurrency();
  if (!parallel || workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace menkf
