#pragma once

#include "twoway/constraints.hpp"

namespace twoway {

/// Matrix-free view of the backward-step LCP
///   lambda >= 0  perp  q + J M^-1 J^T lambda >= 0,
///   q_i = c_i(x) + [J (y_target - x)]_i.
/// `impulse` caches M^-1 J^T lambda so one row's coupling term is a dot
/// product against it; PGS keeps it in sync incrementally.
struct LcpSystem {
    std::vector<Constraint>* constraints = nullptr;
    std::span<const double> inv_mass;
    std::vector<double> target_gap;  // q
    Positions impulse;               // M^-1 J^T lambda, one 3-vector per vertex
    int num_colors = 0;

    double coupling(int row) const {  // (J M^-1 J^T lambda)_row
        const Constraint& c = (*constraints)[row];
        double s = 0.0;
        for (int m = 0; m < c.nverts; ++m) s += c.jac[m].dot(impulse[c.verts[m]]);
        return s;
    }
    void add_impulse(int row, double dlambda) {
        const Constraint& c = (*constraints)[row];
        for (int m = 0; m < c.nverts; ++m) {
            const int v = c.verts[m];
            impulse[v] += inv_mass[v] * dlambda * c.jac[m];
        }
    }
};

/// Builds the system; warm-started multipliers already stored on the
/// constraints are folded into `impulse`.
LcpSystem assemble_lcp(std::vector<Constraint>& constraints, PositionsView x,
                       PositionsView y_target, std::span<const double> inv_mass, int num_colors);

/// Multi-color projected Gauss-Seidel: colors in ascending order, within one
/// color the rows have disjoint dynamic-vertex footprints.
void pgs_sweeps(LcpSystem& sys, int n_iters);

/// Simultaneous (Jacobi) variant with under-relaxation.
void projected_jacobi_sweeps(LcpSystem& sys, int n_iters, double under_relax);

/// First-order augmented-Lagrangian baseline on the same linearized rows:
/// n_inner gradient steps on y with per-iteration dual updates. Leaves a
/// general displacement in `impulse` (not of the form M^-1 J^T lambda).
void al_gradient_descent(LcpSystem& sys, int n_inner);

/// y = y_target + M^-1 J^T lambda (read off the impulse cache). Vertices with
/// inv_mass = 0 keep y = y_target.
Positions recover_target(const LcpSystem& sys, PositionsView y_target);

}  // namespace twoway
