#pragma once

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "ddtrsv/common.hpp"

namespace ddtrsv {

/// Fixed-size pool of worker threads executing index-space loops.
///
/// A pool of size N owns N-1 background threads; the thread calling
/// parallel_for is the N-th participant. Calls may nest: a task that calls
/// parallel_for works on its own loop while idle workers help, so nesting
/// never deadlocks. The first exception thrown by a task is rethrown in the
/// caller after every claimed index has finished.
class WorkerPool {
 public:
  explicit WorkerPool(std::size_t workers = default_worker_count());
  ~WorkerPool();

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  std::size_t size() const noexcept { return threads_.size() + 1; }

  void parallel_for(index_t n, const std::function<void(index_t)>& body);

  static std::size_t default_worker_count() noexcept;

 private:
  struct Job;

  void worker_loop();
  static bool run_one(Job& job);
  void retire(const std::shared_ptr<Job>& job);

  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<std::shared_ptr<Job>> jobs_;
  bool stop_ = false;
};

/// Runs body over [0, n) on the pool, or inline when pool is null.
inline void for_each_index(WorkerPool* pool, index_t n, const std::function<void(index_t)>& body) {
  if (pool == nullptr) {
    for (index_t i = 0; i < n; ++i) body(i);
  } else {
    pool->parallel_for(n, body);
  }
}

}  // namespace ddtrsv
