#pragma once

#include "twoway/mesh.hpp"

namespace twoway::testkit {

/// Dense parameter-grid minimum distance between two simplices, followed by
/// local pattern-search refinement down to `refine_tol`. Slow and simple; the
/// independent check for the closed-form closest-point primitives.
double sampled_pair_distance(const Simplex& a, const Simplex& b, PositionsView positions,
                             int grid = 64, double refine_tol = 1e-9);

}  // namespace twoway::testkit
