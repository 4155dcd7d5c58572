#pragma once

#include <string>

#include "twoway/mesh.hpp"

namespace twoway::testkit {

// --- mesh generators (desk-scale, SI units) ---------------------------------

/// Triangulated rectangle spanned by unit axes du, dv.
MeshState make_grid_patch(int nx, int ny, double size_u, double size_v, const Vec3& origin,
                          const Vec3& du, const Vec3& dv);

/// Square pyramid (4 side faces + 2 base triangles), all vertices static.
MeshState make_pyramid(double base, double height, const Vec3& base_center);

MeshState make_icosphere(int subdivisions, double radius, const Vec3& center);

/// Surface of revolution from a (z, r) profile; r must stay positive. Ends are
/// closed with cone caps to pole vertices when `close_caps` is set.
MeshState make_lathe(const std::vector<double>& zs, const std::vector<double>& radii, int slices,
                     bool close_caps);

/// Open cylinder.
MeshState make_tube(double radius, double height, int slices, int stacks, const Vec3& center);

/// Dumbbell of revolution: two bulbs joined by a thinner neck, closed.
MeshState make_dumbbell(double half_length, double bulb_radius, double neck_radius, int slices,
                        int stacks);

/// Polyline strand with `n` segments from a to b (strand edges, no triangles).
MeshState make_strand(int n, const Vec3& a, const Vec3& b);

std::vector<double> funnel_radii(int stacks, double r_top, double r_bottom);
MeshState make_funnel(int slices, int stacks, double r_top, double r_bottom, double height,
                      const Vec3& top_center);

Positions rotate_about(PositionsView x, const Vec3& center, const Vec3& axis, double angle_rad);
Positions translated(PositionsView x, const Vec3& d);

// --- resolve fixtures --------------------------------------------------------

/// A ready (x, y) pair for resolve/repair. `benign` marks fixtures expected
/// to converge well under the step budget; `penetrating` marks pairs whose
/// straight x->y motion crosses geometry (validated by the generator tests).
struct Fixture {
    std::string name;
    MeshState mesh;
    Positions x, y;
    bool benign = true;
    bool penetrating = false;
};

Fixture fixture_spike_patch(double theta_deg, uint64_t seed);
Fixture fixture_press(double push, uint64_t seed);
Fixture fixture_tube_twist(uint64_t seed);
Fixture fixture_particles();
Fixture fixture_strand_cross(uint64_t seed);
Fixture fixture_random(uint64_t seed, int index);

/// The deterministic fixture battery used by the acceptance suite.
std::vector<Fixture> scene_fixtures(uint64_t seed);

}  // namespace twoway::testkit
