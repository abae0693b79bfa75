#pragma once

#include <cstddef>
#include <functional>

namespace toricost
{

/// Worker count: TORICOST_THREADS if set and positive, else the hardware
/// concurrency (at least 1).
std::size_t worker_count();

/// Run body(begin, end) over a contiguous partition of [0, count).
/// Callers must write results by index so the outcome does not depend on
/// the partition.
void parallel_for(std::size_t count,
                  const std::function<void(std::size_t, std::size_t)>& body);

/// Pairwise sum; the summation tree depends only on the length.
double pairwise_sum(const double* values, std::size_t count);

}  // namespace toricost
