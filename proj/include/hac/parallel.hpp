#pragma once

#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace hac {

// Fixed worker pool for data-parallel inner loops. Work is split into chunks
// whose boundaries depend only on the range and grain, never on the worker
// count, so chunk-local results combined in chunk order are identical for any
// number of threads.
class ThreadPool {
 public:
  explicit ThreadPool(unsigned threads) {
    if (threads == 0) threads = 1;
    for (unsigned i = 1; i < threads; ++i)
      workers_.emplace_back([this] { worker_loop(); });
  }

  ~ThreadPool() {
    {
      std::unique_lock<std::mutex> lock(mutex_);
      stop_ = true;
    }
    wake_.notify_all();
    for (auto& w : workers_) w.join();
  }

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  unsigned thread_count() const {
    return static_cast<unsigned>(workers_.size()) + 1;
  }

  // Invokes fn(chunk_begin, chunk_end) over [begin, end) in chunks of at most
  // `grain` items. The calling thread participates. fn must be safe to call
  // concurrently on disjoint chunks.
  template <class F>
  void parallel_for(std::size_t begin, std::size_t end, std::size_t grain,
                    F&& fn) {
    if (begin >= end) return;
    if (grain == 0) grain = 1;
    const std::size_t items = end - begin;
    const std::size_t chunks = (items + grain - 1) / grain;
    if (chunks == 1 || workers_.empty()) {
      fn(begin, end);
      return;
    }
    {
      std::unique_lock<std::mutex> lock(mutex_);
      job_begin_ = begin;
      job_end_ = end;
      job_grain_ = grain;
      job_ = [&fn](std::size_t b, std::size_t e) { fn(b, e); };
      next_chunk_.store(0, std::memory_order_relaxed);
      pending_chunks_ = chunks;
      ++generation_;
    }
    wake_.notify_all();
    run_chunks();
    std::unique_lock<std::mutex> lock(mutex_);
    done_.wait(lock, [this] { return pending_chunks_ == 0; });
    job_ = nullptr;
  }

 private:
  void run_chunks() {
    const std::size_t chunks =
        (job_end_ - job_begin_ + job_grain_ - 1) / job_grain_;
    for (;;) {
      const std::size_t idx =
          next_chunk_.fetch_add(1, std::memory_order_relaxed);
      if (idx >= chunks) break;
      const std::size_t b = job_begin_ + idx * job_grain_;
      const std::size_t e = std::min(job_end_, b + job_grain_);
      job_(b, e);
      std::unique_lock<std::mutex> lock(mutex_);
      if (--pending_chunks_ == 0) {
        lock.unlock();
        done_.notify_all();
      }
    }
  }

  void worker_loop() {
    std::uint64_t seen = 0;
    for (;;) {
      {
        std::unique_lock<std::mutex> lock(mutex_);
        wake_.wait(lock, [this, seen] { return stop_ || generation_ != seen; });
        if (stop_) return;
        seen = generation_;
      }
      run_chunks();
    }
  }

  std::vector<std::thread> workers_;
  std::mutex mutex_;
  std::condition_variable wake_;
  std::condition_variable done_;
  std::function<void(std::size_t, std::size_t)> job_;
  std::size_t job_begin_ = 0;
  std::size_t job_end_ = 0;
  std::size_t job_grain_ = 1;
  std::atomic<std::size_t> next_chunk_{0};
  std::size_t pending_chunks_ = 0;
  std::uint64_t generation_ = 0;
  bool stop_ = false;
};

// Serial fallback shared by all backends: pool may be null.
template <class F>
void parallel_for(ThreadPool* pool, std::size_t begin, std::size_t end,
                  std::size_t grain, F&& fn) {
  if (pool == nullptr) {
    if (begin < end) fn(begin, end);
    return;
  }
  pool->parallel_for(begin, end, grain, std::forward<F>(fn));
}

}  // namespace hac
