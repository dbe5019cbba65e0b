#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <future>
#include <thread>

namespace wembed {

// Map-reduce over [0, count) with a schedule-independent result.
//
// The index range is split into fixed-size chunks; each chunk is evaluated
// sequentially inside one task and the per-chunk accumulators are merged in
// chunk order. Floating-point reductions therefore produce the same bits
// regardless of how many threads the runtime grants. Chunk size must depend
// only on the problem, never on the host, or determinism is lost.
//
// Acc  make_acc()              -> fresh accumulator
// void body(Acc&, size_t i)    -> fold index i into the accumulator
// void merge(Acc&, Acc&&)      -> fold a chunk accumulator into the total
template <typename Acc, typename MakeAcc, typename Body, typename Merge>
Acc chunked_reduce(std::size_t count, std::size_t chunk_size, MakeAcc make_acc,
                   Body body, Merge merge) {
  Acc total = make_acc();
  if (count == 0) return total;
  if (chunk_size == 0) chunk_size = 1;

  const std::size_t n_chunks = (count + chunk_size - 1) / chunk_size;
  if (n_chunks == 1) {
    for (std::size_t i = 0; i < count; ++i) body(total, i);
    return total;
  }

  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t window = std::min(n_chunks, 2 * hw);

  auto run_chunk = [&](std::size_t c) {
    const std::size_t lo = c * chunk_size;
    const std::size_t hi = std::min(count, lo + chunk_size);
    return std::async(std::launch::async, [&, lo, hi] {
      Acc acc = make_acc();
      for (std::size_t i = lo; i < hi; ++i) body(acc, i);
      return acc;
    });
  };

  std::deque<std::future<Acc>> inflight;
  std::size_t next = 0;
  while (next < n_chunks || !inflight.empty()) {
    while (next < n_chunks && inflight.size() < window) {
      inflight.push_back(run_chunk(next++));
    }
    merge(total, inflight.front().get());
    inflight.pop_front();
  }
  return total;
}

}  // namespace wembed
