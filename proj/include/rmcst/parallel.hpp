#pragma once

#include <cstddef>
#include <functional>

namespace rmcst {

/// Fixed-size set of workers for index-parallel loops. Every index runs
/// exactly once; callers write results into per-index slots so the outcome
/// does not depend on the number of workers.
class WorkerPool {
 public:
  explicit WorkerPool(unsigned threads = 0);

  unsigned size() const noexcept { return threads_; }

  /// Runs body(i) for i in [0, count). The exception thrown for the lowest
  /// failing index, if any, is rethrown after all workers finish.
  void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) const;

  /// Thread count from the RMCST_THREADS environment variable, else the
  /// hardware concurrency.
  static unsigned default_threads();

 private:
  unsigned threads_;
};

}  // namespace rmcst
