#pragma once

#include "twoway/resolve.hpp"

namespace twoway {

/// Globally injective normal flow settings. One outer iteration offsets every
/// vertex along its area-weighted normal by beta (signed), smooths with three
/// Jacobi passes of the cotangent Laplace-Beltrami operator scaled by
/// alpha_smooth, then projects with resolve for injectivity.
struct NormalFlowConfig {
    double beta = 5e-4;          // m per iteration, sign = flow direction
    double alpha_smooth = 0.5;   // smoothing intensity
    int outer_iterations = 20;
    static constexpr int kSmoothingIterations = 3;

    void validate() const;
};

/// Throws std::invalid_argument when the triangle mesh is not a closed,
/// consistently oriented manifold.
void require_closed_manifold(const MeshState& mesh);

Positions area_weighted_normals(const MeshState& mesh, PositionsView x);

/// The pre-projection target: offset along normals + 3 cotan-Jacobi passes.
Positions normal_flow_target(const MeshState& mesh, PositionsView x, const NormalFlowConfig& cfg);

/// One full outer iteration (target + resolve). Returns the new state.
ResolveResult normal_flow_iteration(const MeshState& mesh, PositionsView x,
                                    const NormalFlowConfig& cfg, const ResolveConfig& rcfg);

}  // namespace twoway
