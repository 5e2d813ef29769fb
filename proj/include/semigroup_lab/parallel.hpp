#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace semigroup_lab {

/// Worker count from SEMIGROUP_LAB_THREADS (0 or unset = hardware concurrency).
inline unsigned worker_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const char* env = std::getenv("SEMIGROUP_LAB_THREADS");
  if (env == nullptr || *env == '\0') return hw;
  try {
    long requested = std::stol(env);
    if (requested <= 0) return hw;
    return static_cast<unsigned>(std::min<long>(requested, 256));
  } catch (...) {
    return hw;
  }
}

/// Evaluates `fn(i)` for i in [0, count) and stores results by index, so any
/// reduction the caller performs afterwards runs in ascending index order and
/// is bitwise reproducible regardless of thread count.
template <class Result, class Fn>
std::vector<Result> parallel_map(std::size_t count, Fn&& fn) {
  std::vector<Result> out(count);
  unsigned workers = std::min<std::size_t>(worker_count(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) out[i] = fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace semigroup_lab
