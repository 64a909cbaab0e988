#pragma once

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace cbpscan::parallel {

// Resolve a worker count: an explicit positive request wins, otherwise the
// CBPSCAN_WORKERS environment variable, otherwise 1. One worker is the
// reproducibility baseline; results are bit-reproducible for any fixed count.
inline int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("CBPSCAN_WORKERS")) {
    const int parsed = std::atoi(env);
    if (parsed > 0) return parsed;
  }
  return 1;
}

// Split [0, total) into `workers` contiguous chunks and run
// fn(worker_index, begin, end) on each, in parallel. Deterministic chunk
// boundaries; callers combine per-worker results in worker order.
template <typename Fn>
void run_chunked(int workers, std::size_t total, Fn&& fn) {
  if (workers <= 1 || total <= 1) {
    fn(0, std::size_t{0}, total);
    return;
  }
  const std::size_t w = static_cast<std::size_t>(workers);
  std::vector<std::thread> threads;
  threads.reserve(w);
  for (std::size_t i = 0; i < w; ++i) {
    const std::size_t begin = total * i / w;
    const std::size_t end = total * (i + 1) / w;
    threads.emplace_back([&fn, i, begin, end] { fn(static_cast<int>(i), begin, end); });
  }
  for (auto& t : threads) t.join();
}

}  // namespace cbpscan::parallel
