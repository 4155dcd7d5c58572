#pragma once

#include "twoway/proximity.hpp"

namespace twoway {

enum class ConstraintKind : uint8_t { ContactVT, ContactEE, ContactVE, ContactVV, EdgeLength };

enum class ConstraintFamily : uint8_t { Volume, Gap };

/// One linearized inequality row c + J (y - x) >= 0.
///
/// The frozen data (reference volume / signed gap weights / target length)
/// makes the row re-evaluable at arbitrary positions, which is what the
/// finite-difference checks and the AL baseline need.
struct Constraint {
    ConstraintKind kind = ConstraintKind::ContactVV;
    int nverts = 0;
    std::array<int, 4> verts{-1, -1, -1, -1};
    double value = 0.0;            // c evaluated at the linearization point
    std::array<Vec3, 4> jac{};     // per-vertex jacobian blocks
    double diag = 0.0;             // J M^-1 J^T diagonal entry, regularized
    double lambda = 0.0;
    int color = -1;

    int pair_index = -1;   // into ProximitySet::pairs, -1 for edge rows
    uint64_t pair_key = 0;
    int edge_index = -1;   // topological edge id for EdgeLength rows

    // evaluation support
    enum class Flavor : uint8_t { VolumeRatio, GapRatio, LengthRatio } flavor = Flavor::GapRatio;
    double ref_volume = 0.0;             // scalar triple product of the reference stencil
    std::array<double, 4> gap_weights{}; // signed closest-point weights (+a side, -b side)
    double denom = 0.0;                  // delta for contacts, target length for edges
    double sigma = 0.0;                  // only for EdgeLength
};

/// Re-evaluates the constraint at arbitrary positions with the frozen data.
double constraint_value_at(const Constraint& c, PositionsView positions);

/// Eq.-(10)/(11) vertex-triangle row: reference tetra built by splitting the
/// gap deficit (delta - dist) half/half along the oriented triangle normal,
/// value det(dx/dr) - 1. Falls back to a gap row when the reference volume
/// degenerates (< 1e-18 m^3).
Constraint build_vt_constraint(const ProximityPair& pair, PositionsView positions, double delta);

/// Volume row on the tetra of the four edge endpoints, reference separated to
/// gap delta along the mutual closest direction; near-parallel edges degrade
/// to a gap row at the frozen closest points.
Constraint build_ee_constraint(const ProximityPair& pair, PositionsView positions, double delta);

/// Eq.-(12) row: c = |x_i - x_a| / delta - 1.
Constraint build_vv_constraint(const ProximityPair& pair, PositionsView positions, double delta);

/// Vertex vs segment, treated as a gap row with the closest point frozen
/// barycentrically at assembly.
Constraint build_ve_constraint(const ProximityPair& pair, PositionsView positions, double delta);

/// Gap-family alternative for any pair kind: c = dist / delta - 1 with the
/// closest-point weights frozen at assembly.
Constraint build_gap_constraint(const ProximityPair& pair, PositionsView positions, double delta,
                                ConstraintKind kind);

/// Eq.-(13) soft unilateral rows, one per topological edge:
/// c = sigma - |x_i - x_j| / target_length. Zero-length targets are skipped.
std::vector<Constraint> build_edge_length_constraints(const MeshState& mesh,
                                                      PositionsView positions,
                                                      const std::vector<double>& target_lengths,
                                                      double sigma);

struct AssemblyOptions {
    double delta = 1e-3;
    double sigma = 1.1;
    ConstraintFamily family = ConstraintFamily::Volume;
    bool edge_constraints = true;
};

/// Builds contact rows for every active pair closer than delta (linearized at
/// `positions` = x^(l)) followed by the edge-length rows. diag entries are
/// filled from inv_mass and regularized.
std::vector<Constraint> linearize_all(const ProximitySet& set, PositionsView positions,
                                      const MeshState& mesh,
                                      const std::vector<double>& edge_targets,
                                      const AssemblyOptions& opts);

void fill_diag(Constraint& c, std::span<const double> inv_mass);

/// Randomized greedy coloring of the constraint conflict graph (two rows
/// conflict when they share a vertex with positive inv_mass). Returns the
/// color count.
int color_constraints(std::vector<Constraint>& constraints, std::span<const double> inv_mass,
                      uint64_t seed);

}  // namespace twoway
