#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace tmax {

/// Worker count to use when the caller passes 0.
inline unsigned default_workers() noexcept {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1U : hw;
}

inline unsigned resolve_workers(unsigned requested) noexcept {
  return requested == 0 ? default_workers() : requested;
}

/// Splits [0, count) into `workers` contiguous blocks and runs
/// fn(worker, begin, end) for each, one thread per block. The partition
/// depends only on (count, workers). The first exception thrown by any
/// block is rethrown after all threads join.
template <class Fn>
void parallel_blocks(std::size_t count, unsigned workers, Fn&& fn) {
  workers = std::max(1U, std::min<unsigned>(resolve_workers(workers),
                                            static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (workers == 1) {
    fn(0U, std::size_t{0}, count);
    return;
  }
  std::exception_ptr first_error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> threads;
    threads.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t begin = count * w / workers;
      const std::size_t end = count * (w + 1) / workers;
      threads.emplace_back([&, w, begin, end] {
        try {
          fn(w, begin, end);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      });
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace tmax
