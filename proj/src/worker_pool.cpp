#include "ddtrsv/worker_pool.hpp"

#include <algorithm>
#include <atomic>
#include <exception>

namespace ddtrsv {

struct WorkerPool::Job {
  const std::function<void(index_t)>* body = nullptr;
  index_t n = 0;
  std::atomic<index_t> next{0};
  std::atomic<index_t> done{0};
  std::mutex error_mutex;
  std::exception_ptr error;

  bool exhausted() const { return next.load(std::memory_order_relaxed) >= n; }
};

WorkerPool::WorkerPool(std::size_t workers) {
  if (workers == 0) throw InvalidArgument("worker pool needs at least one worker");
  threads_.reserve(workers - 1);
  for (std::size_t t = 1; t < workers; ++t) threads_.emplace_back([this] { worker_loop(); });
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard lock(mutex_);
    stop_ = true;
  }
  cv_.notify_all();
  for (auto& t : threads_) t.join();
}

std::size_t WorkerPool::default_worker_count() noexcept {
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

bool WorkerPool::run_one(Job& job) {
  const index_t i = job.next.fetch_add(1, std::memory_order_relaxed);
  if (i >= job.n) return false;
  try {
    (*job.body)(i);
  } catch (...) {
    std::lock_guard lock(job.error_mutex);
    if (!job.error) job.error = std::current_exception();
  }
  if (job.done.fetch_add(1, std::memory_order_acq_rel) + 1 == job.n) job.done.notify_all();
  return true;
}

void WorkerPool::retire(const std::shared_ptr<Job>& job) {
  std::lock_guard lock(mutex_);
  auto it = std::find(jobs_.begin(), jobs_.end(), job);
  if (it != jobs_.end()) jobs_.erase(it);
}

void WorkerPool::worker_loop() {
  for (;;) {
    std::shared_ptr<Job> job;
    {
      std::unique_lock lock(mutex_);
      cv_.wait(lock, [this] { return stop_ || !jobs_.empty(); });
      if (stop_) return;
      // Oldest job with unclaimed indices; exhausted ones are dropped.
      while (!jobs_.empty() && jobs_.front()->exhausted()) jobs_.pop_front();
      if (jobs_.empty()) continue;
      job = jobs_.front();
    }
    while (run_one(*job)) {
    }
    retire(job);
  }
}

void WorkerPool::parallel_for(index_t n, const std::function<void(index_t)>& body) {
  if (n <= 0) return;
  if (threads_.empty() || n == 1) {
    for (index_t i = 0; i < n; ++i) body(i);
    return;
  }

  auto job = std::make_shared<Job>();
  job->body = &body;
  job->n = n;
  {
    std::lock_guard lock(mutex_);
    jobs_.push_back(job);
  }
  cv_.notify_all();

  while (run_one(*job)) {
  }
  retire(job);

  for (index_t d = job->done.load(std::memory_order_acquire); d < n;
       d = job->done.load(std::memory_order_acquire)) {
    job->done.wait(d, std::memory_order_acquire);
  }
  if (job->error) std::rethrow_exception(job->error);
}

}  // namespace ddtrsv
