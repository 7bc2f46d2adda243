// SPDX-License-Identifier: Apache-2.0
//
// Minimal parallel map over an index range. Work items must be
// independent; results are written per index, so reductions performed
// afterwards in index order are deterministic regardless of scheduling.

#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace tround {

inline int resolve_workers(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(i) for i in [0, count). `workers <= 1` runs inline. The first
/// exception (by lowest index) is rethrown after all workers join.
template <typename Fn>
void parallel_for(int count, int workers, Fn&& fn) {
  if (count <= 0) return;
  workers = std::min(resolve_workers(workers), count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }

  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(count);
  auto worker = [&] {
    for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  std::vector<std::thread> threads;
  threads.reserve(workers - 1);
  for (int t = 1; t < workers; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();

  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace tround
