#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace jonesq {

/// 0 means "all hardware threads".
inline unsigned resolve_workers(unsigned workers) {
  if (workers > 0) return workers;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(i) for i in [0, count). Each index is handled exactly once; callers write
/// into pre-sized slots, so results do not depend on the worker count. The exception of the
/// lowest failing index is rethrown.
template <class Body>
void parallel_for(std::size_t count, unsigned workers, Body&& body) {
  const unsigned w = static_cast<unsigned>(std::min<std::size_t>(resolve_workers(workers), count));
  if (w <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  auto run = [&] {
    for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(w - 1);
  for (unsigned t = 1; t < w; ++t) pool.emplace_back(run);
  run();
  pool.clear();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace jonesq
