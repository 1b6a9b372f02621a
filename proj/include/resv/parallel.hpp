#pragma once

#include <barrier>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace resv {

// Fixed-size pool running index-parallel loops. Every parallel_for is one
// phase: workers pick up a static stride of indices and the call returns only
// after all of them reached the closing barrier. Tasks must write only to
// storage owned by their index, which makes results independent of the
// worker count.
class WorkerPool {
 public:
  /// workers == 0 selects std::thread::hardware_concurrency().
  explicit WorkerPool(std::size_t workers = 1);
  ~WorkerPool();

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  std::size_t size() const noexcept { return workers_; }

  void parallel_for(std::size_t n, const std::function<void(std::size_t)>& task);

 private:
  void run_stride(std::size_t worker);
  void worker_loop(std::size_t worker);

  std::size_t workers_;
  std::vector<std::jthread> threads_;
  std::barrier<> start_;
  std::barrier<> finish_;

  // Job description for the current phase; written only between phases.
  const std::function<void(std::size_t)>* task_ = nullptr;
  std::size_t count_ = 0;
  bool stopping_ = false;

  std::mutex error_mutex_;
  std::size_t error_index_ = 0;
  std::exception_ptr error_;
};

/// Runs task(i) for i in [0, n) on pool, or serially when pool is null.
void parallel_for(WorkerPool* pool, std::size_t n, const std::function<void(std::size_t)>& task);

}  // namespace resv
