#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

#include "slowspec/types.hpp"

namespace slowspec {

/// Thread budget: min(hardware, SLOWSPEC_THREADS) with a floor of 1.
int thread_budget();

/// Runs fn(begin, end) over [0, n) in fixed-size chunks.  The chunk layout
/// is independent of the thread count and workers write to disjoint ranges,
/// so results are deterministic.  Only safe for fn without shared mutable
/// state across chunks.
void parallel_for_chunks(Index n, Index chunk,
                         const std::function<void(Index, Index)>& fn);

}  // namespace slowspec
