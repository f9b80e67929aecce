#pragma once

#include <cstddef>

#include "phd/storage.hpp"

namespace phd::kernels {

enum class Exec { Serial, Parallel };

/// Probe-side row count below which the parallel kernel falls back to the
/// serial loop; spawning a team costs more than it saves on small inputs.
inline constexpr std::size_t kParallelProbeThreshold = 4096;

/// Hash join of `left` and `right` on every shared variable. The output
/// header is left's header followed by right's non-shared columns. Rows are
/// not deduplicated. The serial kernel is the reference for the parallel one
/// and both produce rows in the same order.
BindingTable hash_join(const BindingTable& left, const BindingTable& right, Exec exec);

/// Filter of `table` rows against the key set of `keys` (shared columns).
BindingTable semi_join(const BindingTable& table, const BindingTable& keys, Exec exec);

}  // namespace phd::kernels
