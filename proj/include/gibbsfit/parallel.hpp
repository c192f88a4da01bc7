#ifndef GIBBSFIT_PARALLEL_HPP
#define GIBBSFIT_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace gibbsfit {

/// Worker cap: GIBBSFIT_THREADS when set, hardware concurrency otherwise.
std::size_t worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads with a
/// static block partition. Results must be written to per-index slots so the
/// outcome is independent of scheduling; the first exception is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace gibbsfit

#endif  // GIBBSFIT_PARALLEL_HPP
