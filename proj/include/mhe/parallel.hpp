#ifndef MHE_PARALLEL_HPP
#define MHE_PARALLEL_HPP

#include <algorithm>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace mhe {

// Runs body(i) for i in [0, count), split into contiguous blocks over at most
// `threads` workers. Each index must touch only its own output slots; under
// that contract results are identical for every thread count.
inline void parallel_for(int count, int threads, const std::function<void(int)>& body) {
  if (count <= 0) return;
  if (threads <= 1 || count == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  const int workers = std::min(threads, count);
  const int chunk = (count + workers - 1) / workers;
  std::vector<std::thread> pool;
  std::exception_ptr first_error = nullptr;
  std::mutex error_lock;
  for (int t = 0; t < workers; ++t) {
    const int begin = t * chunk;
    const int end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, &first_error, &error_lock, begin, end]() {
      try {
        for (int i = begin; i < end; ++i) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> guard(error_lock);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& worker : pool) worker.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace mhe

#endif  // MHE_PARALLEL_HPP
