#include "slowspec/parallel.hpp"

#include <algorithm>
#include <cstdlib>

namespace slowspec {

int thread_budget() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (const char* env = std::getenv("SLOWSPEC_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) hw = std::min(hw, cap);
  }
  return hw;
}

void parallel_for_chunks(Index n, Index chunk,
                         const std::function<void(Index, Index)>& fn) {
  if (n <= 0) return;
  const int workers = thread_budget();
  if (workers <= 1 || n <= chunk) {
    for (Index begin = 0; begin < n; begin += chunk)
      fn(begin, std::min(begin + chunk, n));
    return;
  }
  std::atomic<Index> next{0};
  auto work = [&] {
    for (;;) {
      const Index begin = next.fetch_add(chunk);
      if (begin >= n) return;
      fn(begin, std::min(begin + chunk, n));
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers - 1));
  for (int i = 1; i < workers; ++i) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
}

}  // namespace slowspec
