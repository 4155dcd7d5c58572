#pragma once

#include <optional>

#include "twoway/mesh.hpp"
#include "twoway/types.hpp"

namespace twoway {

/// Closest-point query result between two simplices a and b.
/// `direction` points from b's closest point towards a's closest point and is
/// unit length unless `degenerate` is set (distance below kDegenerateDistance),
/// in which case it holds the documented fallback (triangle normal for VT,
/// cross of edge directions for EE) or zero when even that is undefined.
struct ClosestResult {
    double distance = 0.0;
    std::array<double, 3> weights_a{1.0, 0.0, 0.0};
    std::array<double, 3> weights_b{1.0, 0.0, 0.0};
    Vec3 direction = Vec3::Zero();
    bool degenerate = false;
};

inline constexpr double kDegenerateDistance = 1e-9;   // m
inline constexpr double kDegenerateTriArea = 1e-12;   // m^2
inline constexpr double kDegenerateEdgeLen = 1e-12;   // m

ClosestResult vertex_vertex_closest(const Vec3& p, const Vec3& q);
ClosestResult vertex_edge_closest(const Vec3& p, const Vec3& e0, const Vec3& e1);

/// Global minimum between point p and the solid triangle (a, b, c).
/// Returns nullopt for a degenerate triangle ("skip pair").
std::optional<ClosestResult> vertex_triangle_closest(const Vec3& p, const Vec3& a, const Vec3& b,
                                                     const Vec3& c);

/// Global minimum between segments (p1, p2) and (q1, q2), clamped to the
/// endpoints; near-parallel segments are resolved by endpoint enumeration.
/// Returns nullopt when either segment is degenerate.
std::optional<ClosestResult> edge_edge_closest(const Vec3& p1, const Vec3& p2, const Vec3& q1,
                                               const Vec3& q2);

/// Dispatches a non-adjacent pair to the VV/VE/VT/EE primitive.
/// Throws std::invalid_argument when the simplices share a vertex or the
/// combination has no canonical primitive (e.g. triangle-triangle).
std::optional<ClosestResult> simplex_pair_closest(const Simplex& sa, const Simplex& sb,
                                                  PositionsView positions);

/// Closest point on simplex `s` given barycentric weights.
Vec3 weighted_point(const Simplex& s, const std::array<double, 3>& w, PositionsView positions);

}  // namespace twoway
