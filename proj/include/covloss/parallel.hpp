#pragma once

#include <cstddef>
#include <functional>

namespace covloss {

/// Worker count: COVLOSS_THREADS when set to a positive integer, otherwise
/// the hardware concurrency (at least 1).
std::size_t thread_count();

/// Runs body(i) for i in [0, n) on up to thread_count() threads. Tasks are
/// handed out dynamically; callers write results by index so the outcome
/// does not depend on scheduling. The first exception is rethrown after all
/// workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace covloss
