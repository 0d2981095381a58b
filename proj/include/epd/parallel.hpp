#ifndef EPD_PARALLEL_HPP
#define EPD_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace epd {

// Upper bound on worker threads used by the kernels. 0 means
// std::thread::hardware_concurrency().
void SetMaxThreads(unsigned threads);
unsigned MaxThreads();

namespace detail {

// Runs body(begin, end) over disjoint contiguous slices of [0, count). Each
// index is handled by exactly one call, so kernels that write only their own
// outputs produce identical results at any thread count.
template <typename Body>
void ParallelFor(std::size_t count, std::size_t min_per_thread, Body&& body) {
  std::size_t threads = MaxThreads();
  if (min_per_thread > 0) {
    threads = std::min(threads, std::max<std::size_t>(1, count / min_per_thread));
  }
  threads = std::min(threads, count);
  if (threads <= 1) {
    if (count > 0) body(std::size_t{0}, count);
    return;
  }
  std::vector<std::jthread> workers;
  workers.reserve(threads - 1);
  const std::size_t chunk = (count + threads - 1) / threads;
  for (std::size_t t = 1; t < threads; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    workers.emplace_back([&body, begin, end] { body(begin, end); });
  }
  body(std::size_t{0}, std::min(count, chunk));
}

}  // namespace detail
}  // namespace epd

#endif  // EPD_PARALLEL_HPP
