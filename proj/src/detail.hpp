#pragma once

#include <span>

#include "blockmix/engine.hpp"

namespace blockmix::detail {

// Raises entries to `floor`, then rescales the excess so the row sums to one.
void floor_row(std::span<double> x, double floor);

void floor_rows(Membership& alpha, double floor);

// E-steps given the block stats of state.alpha, which the fit loop already has.
Membership e_step_mm(const SparseNetwork& network, const VariationalState& state,
                     const BlockDyadStats& stats, double floor);
Membership e_step_fp(const SparseNetwork& network, const VariationalState& state,
                     const BlockDyadStats& stats, double floor);

}  // namespace blockmix::detail
