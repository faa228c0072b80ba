#include "topoflow/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace topoflow {
namespace {

std::atomic<int> g_max_threads{0};

int default_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

void set_max_threads(int threads) { g_max_threads.store(std::max(threads, 0)); }

int max_threads() {
  const int n = g_max_threads.load();
  return n > 0 ? n : default_threads();
}

void parallel_for(int count, int grain, const std::function<void(int, int)>& body) {
  if (count <= 0) return;
  grain = std::max(grain, 1);
  const int chunks = (count + grain - 1) / grain;
  const int workers = std::min(max_threads(), chunks);
  if (workers <= 1) {
    for (int begin = 0; begin < count; begin += grain) body(begin, std::min(begin + grain, count));
    return;
  }

  std::atomic<int> next{0};
  std::mutex error_lock;
  std::exception_ptr error;
  auto worker = [&] {
    for (int c = next.fetch_add(1); c < chunks; c = next.fetch_add(1)) {
      const int begin = c * grain;
      try {
        body(begin, std::min(begin + grain, count));
      } catch (...) {
        const std::lock_guard lock(error_lock);
        if (!error) error = std::current_exception();
        next.store(chunks);  // drain the remaining chunks
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers - 1));
    for (int i = 1; i < workers; ++i) pool.emplace_back(worker);
    worker();
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace topoflow
