#pragma once

#include <cstdint>
#include <functional>
#include <span>

namespace kernbound {

// Global worker cap applied on top of hardware concurrency. 0 means no cap.
void set_thread_cap(int cap);
int thread_cap();

// Number of workers actually used for `requested` (0 = auto).
int resolve_threads(int requested);

// Runs body(begin, end) over a partition of [0, n) on up to `threads`
// workers. Bodies must write disjoint state; the partition never affects
// results because work is indexed, not streamed.
void parallel_chunks(std::int64_t n, int threads,
                     const std::function<void(std::int64_t, std::int64_t)>& body);

// Deterministic reduction: fixed recursive pairing independent of thread
// count.
double pairwise_sum(std::span<const double> values);

}  // namespace kernbound
