#ifndef SMCCHEES_PARALLEL_HPP
#define SMCCHEES_PARALLEL_HPP

#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "smcchees/types.hpp"

namespace smcchees {

/// Runs body(i) for i in [0, n) on `threads` workers with a strided split.
/// Iterations must be independent; the first exception is rethrown.
template <typename Body>
void parallel_for(Index n, unsigned threads, Body&& body) {
  if (threads <= 1 || n < 2) {
    for (Index i = 0; i < n; ++i) body(i);
    return;
  }
  const auto workers_count = static_cast<Index>(threads) < n ? static_cast<Index>(threads) : n;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> workers;
    workers.reserve(static_cast<std::size_t>(workers_count));
    for (Index w = 0; w < workers_count; ++w) {
      workers.emplace_back([&, w] {
        try {
          for (Index i = w; i < n; i += workers_count) body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace smcchees

#endif
