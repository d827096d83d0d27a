#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace quasibohm {

/// Runs fn(i) for i in [0, count) on up to `threads` workers with a static
/// contiguous partition. Results written by index are therefore independent
/// of the thread count. If several indices throw, the exception of the lowest
/// index is rethrown after all workers join.
template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::size_t> failed_at(workers, count);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = count * w / workers;
    const std::size_t end = count * (w + 1) / workers;
    pool.emplace_back([&, w, begin, end] {
      for (std::size_t i = begin; i < end; ++i) {
        try {
          fn(i);
        } catch (...) {
          errors[w] = std::current_exception();
          failed_at[w] = i;
          return;
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  for (std::size_t w = 0; w < workers; ++w) {
    if (errors[w]) std::rethrow_exception(errors[w]);
  }
}

}  // namespace quasibohm
