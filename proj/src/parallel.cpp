#include "resv/parallel.hpp"

#include <algorithm>

namespace resv {

namespace {

std::size_t resolve_workers(std::size_t requested) {
  if (requested != 0) return requested;
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

}  // namespace

WorkerPool::WorkerPool(std::size_t workers)
    : workers_(resolve_workers(workers)),
      start_(static_cast<std::ptrdiff_t>(workers_)),
      finish_(static_cast<std::ptrdiff_t>(workers_)) {
  threads_.reserve(workers_ - 1);
  for (std::size_t w = 1; w < workers_; ++w) {
    threads_.emplace_back([this, w] { worker_loop(w); });
  }
}

WorkerPool::~WorkerPool() {
  if (workers_ > 1) {
    stopping_ = true;
    start_.arrive_and_wait();
  }
}

void WorkerPool::run_stride(std::size_t worker) {
  for (std::size_t i = worker; i < count_; i += workers_) {
    try {
      (*task_)(i);
    } catch (...) {
      std::lock_guard lock(error_mutex_);
      // Keep the lowest failing index so the reported error does not depend
      // on scheduling.
      if (!error_ || i < error_index_) {
        error_ = std::current_exception();
        error_index_ = i;
      }
    }
  }
}

void WorkerPool::worker_loop(std::size_t worker) {
  for (;;) {
    start_.arrive_and_wait();
    if (stopping_) return;
    run_stride(worker);
    finish_.arrive_and_wait();
  }
}

void WorkerPool::parallel_for(std::size_t n, const std::function<void(std::size_t)>& task) {
  if (n == 0) return;
  if (workers_ == 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  task_ = &task;
  count_ = n;
  error_ = nullptr;
  start_.arrive_and_wait();
  run_stride(0);
  finish_.arrive_and_wait();
  task_ = nullptr;
  if (error_) std::rethrow_exception(error_);
}

void parallel_for(WorkerPool* pool, std::size_t n, const std::function<void(std::size_t)>& task) {
  if (pool == nullptr) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  pool->parallel_for(n, task);
}

}  // namespace resv
