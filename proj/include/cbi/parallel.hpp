#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace cbi {

// 0 means "use all available hardware threads".
inline unsigned resolve_threads(unsigned requested) noexcept
{
  if (requested != 0)
    return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

// Runs body(i) for i in [0, count) over contiguous static blocks. Each index is
// visited exactly once, so results written to per-index slots do not depend on
// the thread count. The first exception thrown by any worker is rethrown.
template<class Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body)
{
  unsigned workers = resolve_threads(threads);
  if (count == 0)
    return;
  if (workers <= 1 || count == 1) {
    for (std::size_t i = 0; i < count; ++i)
      body(i);
    return;
  }
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));

  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t block = (count + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = w * block;
    const std::size_t end = std::min(count, begin + block);
    if (begin >= end)
      break;
    pool.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i)
          body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure)
          failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool)
    t.join();
  if (failure)
    std::rethrow_exception(failure);
}

} // namespace cbi
