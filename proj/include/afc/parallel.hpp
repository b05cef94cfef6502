#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace afc {

// Splits [0, count) into at most `threads` contiguous chunks and runs
// fn(chunk_index, begin, end) for each. Chunk boundaries depend only on
// (count, threads), so callers that merge per-chunk results in chunk order
// get output identical to a serial run.
template <typename Fn>
void parallel_chunks(std::size_t count, unsigned threads, Fn&& fn) {
  const std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(threads, count));
  if (chunks <= 1) {
    fn(std::size_t{0}, std::size_t{0}, count);
    return;
  }
  const std::size_t base = count / chunks;
  const std::size_t extra = count % chunks;
  std::vector<std::jthread> workers;
  workers.reserve(chunks);
  std::size_t begin = 0;
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t end = begin + base + (c < extra ? 1 : 0);
    workers.emplace_back([&fn, c, begin, end] { fn(c, begin, end); });
    begin = end;
  }
}

inline std::size_t chunk_count(std::size_t count, unsigned threads) {
  return std::max<std::size_t>(1, std::min<std::size_t>(threads, count));
}

}  // namespace afc
