#pragma once

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace normal_forge {

// Thread count read from NORMAL_FORGE_THREADS, or 1 when unset/unparseable.
int default_thread_count();

// Runs fn(row_begin, row_end) over contiguous row bands. Each band is written
// by exactly one thread and per-pixel work never depends on band layout, so
// results are identical for any thread count.
template <typename Fn>
void parallel_rows(int rows, int threads, Fn&& fn) {
  threads = std::clamp(threads, 1, std::max(rows, 1));
  if (threads == 1) {
    fn(0, rows);
    return;
  }
  std::vector<std::jthread> workers;
  workers.reserve(static_cast<std::size_t>(threads));
  const int band = (rows + threads - 1) / threads;
  for (int begin = 0; begin < rows; begin += band) {
    const int end = std::min(rows, begin + band);
    workers.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
}

}  // namespace normal_forge
