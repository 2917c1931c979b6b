#pragma once

#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace lirlab {

/// 0 means "one per hardware thread".
std::size_t resolve_thread_count(std::size_t requested) noexcept;

/// Fixed-size pool of workers. The calling thread participates in every
/// parallel_for, so a pool of size 1 spawns no threads at all.
///
/// parallel_for hands out indices dynamically; callers that need
/// deterministic output must make each index's work independent of which
/// worker runs it.
class WorkerPool {
 public:
  explicit WorkerPool(std::size_t threads = 0);
  ~WorkerPool();

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  std::size_t size() const noexcept { return workers_.size() + 1; }

  /// Runs fn(i) for i in [0, count). The first exception thrown by any
  /// invocation is rethrown after all workers have stopped.
  void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

 private:
  void worker_loop();
  void drain();

  std::vector<std::thread> workers_;
  std::mutex mutex_;
  std::condition_variable wake_;
  std::condition_variable done_;
  std::size_t generation_ = 0;
  std::size_t active_ = 0;
  bool stopping_ = false;

  const std::function<void(std::size_t)>* job_ = nullptr;
  std::size_t count_ = 0;
  std::atomic<std::size_t> next_{0};
  std::exception_ptr error_;
  std::mutex error_mutex_;
};

}  // namespace lirlab
