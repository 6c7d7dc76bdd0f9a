#include "chainspec/runtime.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace chainspec {
namespace {

std::atomic<int> g_threads{0};

int detect() {
  if (const char* s = std::getenv("CHAINSPEC_THREADS")) {
    const int v = std::atoi(s);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

}  // namespace

int thread_count() {
  int t = g_threads.load(std::memory_order_relaxed);
  if (t <= 0) {
    t = detect();
    g_threads.store(t, std::memory_order_relaxed);
  }
  return t;
}

void set_thread_count(int n) {
  g_threads.store(n > 0 ? n : 0, std::memory_order_relaxed);
}

void parallel_chunks(
    std::size_t n,
    const std::function<void(std::size_t, std::size_t, int)>& fn) {
  if (n == 0) return;
  const int workers =
      static_cast<int>(std::min<std::size_t>(thread_count(), n));
  if (workers <= 1) {
    fn(0, n, 0);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  // the first worker exception wins and is rethrown on the calling thread
  std::exception_ptr error;
  std::mutex error_mutex;
  auto guarded = [&](std::size_t b, std::size_t e, int w) {
    try {
      fn(b, e, w);
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  };
  const std::size_t base = n / workers;
  const std::size_t extra = n % workers;
  std::size_t begin = 0;
  for (int w = 0; w < workers; ++w) {
    const std::size_t len = base + (static_cast<std::size_t>(w) < extra);
    pool.emplace_back(guarded, begin, begin + len, w);
    begin += len;
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace chainspec
