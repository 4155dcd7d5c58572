#include "twoway/testkit/fixtures.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <random>

namespace twoway::testkit {

namespace {
constexpr double kPi = std::numbers::pi;
}

MeshState make_grid_patch(int nx, int ny, double size_u, double size_v, const Vec3& origin,
                          const Vec3& du, const Vec3& dv) {
    MeshState m;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            m.positions.push_back(origin + du * (size_u * i / (nx - 1)) +
                                  dv * (size_v * j / (ny - 1)));
    auto id = [nx](int i, int j) { return j * nx + i; };
    for (int j = 0; j + 1 < ny; ++j)
        for (int i = 0; i + 1 < nx; ++i) {
            // alternate the diagonal for an even texture
            if ((i + j) % 2 == 0) {
                m.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
                m.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
            } else {
                m.triangles.push_back({id(i, j), id(i + 1, j), id(i, j + 1)});
                m.triangles.push_back({id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
            }
        }
    m.finalize();
    return m;
}

MeshState make_pyramid(double base, double height, const Vec3& c) {
    MeshState m;
    const double h = base / 2.0;
    m.positions = {c + Vec3(-h, -h, 0), c + Vec3(h, -h, 0), c + Vec3(h, h, 0), c + Vec3(-h, h, 0),
                   c + Vec3(0, 0, height)};
    m.triangles = {{0, 1, 4}, {1, 2, 4}, {2, 3, 4}, {3, 0, 4}, {0, 2, 1}, {0, 3, 2}};
    m.finalize();
    m.inv_mass.assign(m.positions.size(), 0.0);
    return m;
}

MeshState make_icosphere(int subdivisions, double radius, const Vec3& center) {
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> verts = {{-1, t, 0}, {1, t, 0},   {-1, -t, 0}, {1, -t, 0},
                               {0, -1, t}, {0, 1, t},   {0, -1, -t}, {0, 1, -t},
                               {t, 0, -1}, {t, 0, 1},   {-t, 0, -1}, {-t, 0, 1}};
    std::vector<std::array<int, 3>> faces = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9},  {5, 11, 4},
        {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6},  {3, 6, 8},
        {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    for (Vec3& v : verts) v.normalize();

    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            Vec3 v = (verts[a] + verts[b]).normalized();
            verts.push_back(v);
            const int id = static_cast<int>(verts.size()) - 1;
            midpoint.emplace(key, id);
            return id;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(faces.size() * 4);
        for (const auto& f : faces) {
            const int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        faces = std::move(next);
    }

    MeshState m;
    for (const Vec3& v : verts) m.positions.push_back(center + radius * v);
    m.triangles = faces;
    m.finalize();
    return m;
}

MeshState make_lathe(const std::vector<double>& zs, const std::vector<double>& radii, int slices,
                     bool close_caps) {
    MeshState m;
    const int stacks = static_cast<int>(zs.size());
    for (int s = 0; s < stacks; ++s)
        for (int k = 0; k < slices; ++k) {
            const double a = 2.0 * kPi * k / slices;
            m.positions.emplace_back(radii[s] * std::cos(a), radii[s] * std::sin(a), zs[s]);
        }
    auto id = [slices](int s, int k) { return s * slices + (k % slices); };
    for (int s = 0; s + 1 < stacks; ++s)
        for (int k = 0; k < slices; ++k) {
            m.triangles.push_back({id(s, k), id(s, k + 1), id(s + 1, k)});
            m.triangles.push_back({id(s, k + 1), id(s + 1, k + 1), id(s + 1, k)});
        }
    if (close_caps) {
        const int p0 = static_cast<int>(m.positions.size());
        m.positions.emplace_back(0, 0, zs.front());
        const int p1 = static_cast<int>(m.positions.size());
        m.positions.emplace_back(0, 0, zs.back());
        for (int k = 0; k < slices; ++k) {
            m.triangles.push_back({p0, id(0, k + 1), id(0, k)});
            m.triangles.push_back({p1, id(stacks - 1, k), id(stacks - 1, k + 1)});
        }
    }
    m.finalize();
    return m;
}

MeshState make_tube(double radius, double height, int slices, int stacks, const Vec3& center) {
    std::vector<double> zs(stacks), rs(stacks, radius);
    for (int s = 0; s < stacks; ++s) zs[s] = -height / 2 + height * s / (stacks - 1);
    MeshState m = make_lathe(zs, rs, slices, false);
    for (Vec3& p : m.positions) p += center;
    m.finalize();
    return m;
}

MeshState make_dumbbell(double half_length, double bulb_radius, double neck_radius, int slices,
                        int stacks) {
    std::vector<double> zs(stacks), rs(stacks);
    for (int s = 0; s < stacks; ++s) {
        const double t = -1.0 + 2.0 * s / (stacks - 1);  // [-1, 1]
        zs[s] = t * half_length;
        rs[s] = neck_radius + (bulb_radius - neck_radius) * 0.5 * (1.0 - std::cos(2.0 * kPi * t));
    }
    return make_lathe(zs, rs, slices, true);
}

MeshState make_strand(int n, const Vec3& a, const Vec3& b) {
    MeshState m;
    for (int i = 0; i <= n; ++i) m.positions.push_back(a + (b - a) * (static_cast<double>(i) / n));
    for (int i = 0; i < n; ++i) m.strand_edges.push_back({i, i + 1});
    m.finalize();
    return m;
}

std::vector<double> funnel_radii(int stacks, double r_top, double r_bottom) {
    std::vector<double> rs(stacks);
    for (int s = 0; s < stacks; ++s) {
        const double t = static_cast<double>(s) / (stacks - 1);
        rs[s] = r_top + (r_bottom - r_top) * t;  // monotone constriction
    }
    return rs;
}

MeshState make_funnel(int slices, int stacks, double r_top, double r_bottom, double height,
                      const Vec3& top_center) {
    std::vector<double> zs(stacks);
    for (int s = 0; s < stacks; ++s) zs[s] = -height * s / (stacks - 1);
    MeshState m = make_lathe(zs, funnel_radii(stacks, r_top, r_bottom), slices, false);
    for (Vec3& p : m.positions) p += top_center;
    m.finalize();
    m.inv_mass.assign(m.positions.size(), 0.0);
    return m;
}

Positions rotate_about(PositionsView x, const Vec3& center, const Vec3& axis, double angle_rad) {
    const Eigen::AngleAxisd rot(angle_rad, axis.normalized());
    Positions out(x.begin(), x.end());
    for (Vec3& p : out) p = center + rot * (p - center);
    return out;
}

Positions translated(PositionsView x, const Vec3& d) {
    Positions out(x.begin(), x.end());
    for (Vec3& p : out) p += d;
    return out;
}

Fixture fixture_spike_patch(double theta_deg, uint64_t seed) {
    (void)seed;
    Fixture f;
    f.name = "spike_theta" + std::to_string(static_cast<int>(theta_deg));
    f.mesh = make_pyramid(0.04, 0.03, Vec3(0.0013, -0.0017, 0));  // off-grid apex
    MeshState patch = make_grid_patch(9, 9, 0.08, 0.08, Vec3(-0.04, -0.04, 0.036), Vec3::UnitX(),
                                      Vec3::UnitY());
    compute_lumped_masses(patch, 0.1, 0.0);
    append_mesh(f.mesh, patch);
    f.x = f.mesh.positions;
    // target: spin about the patch center and push down through the spike
    Positions y = rotate_about(f.x, Vec3(0, 0, 0.036), Vec3::UnitZ(), theta_deg * kPi / 180.0);
    y = translated(y, Vec3(0, 0, -0.012));
    for (int v = 0; v < f.mesh.num_vertices(); ++v)
        if (f.mesh.is_static(v)) y[v] = f.x[v];
    f.y = std::move(y);
    f.benign = theta_deg <= 45.0;
    f.penetrating = true;
    return f;
}

Fixture fixture_press(double push, uint64_t seed) {
    (void)seed;
    Fixture f;
    f.name = "press";
    f.mesh = make_grid_patch(7, 7, 0.06, 0.06, Vec3(-0.03, -0.03, 0.0), Vec3::UnitX(),
                             Vec3::UnitY());
    f.mesh.inv_mass.assign(f.mesh.positions.size(), 0.0);  // lower sheet is the collider
    MeshState top = make_grid_patch(7, 7, 0.06, 0.06, Vec3(-0.0295, -0.0295, 0.003),
                                    Vec3::UnitX(), Vec3::UnitY());
    compute_lumped_masses(top, 0.1, 0.0);
    append_mesh(f.mesh, top);
    f.x = f.mesh.positions;
    Positions y = f.x;
    for (size_t v = 49; v < y.size(); ++v) y[v].z() -= push;  // drive the top sheet through
    f.y = std::move(y);
    f.benign = push <= 0.01;
    f.penetrating = push > 0.003;
    return f;
}

Fixture fixture_tube_twist(uint64_t seed) {
    (void)seed;
    Fixture f;
    f.name = "tube_twist";
    f.mesh = make_tube(0.015, 0.06, 12, 7, Vec3::Zero());
    compute_lumped_masses(f.mesh, 0.1, 0.0);
    f.x = f.mesh.positions;
    Positions y = f.x;
    for (size_t v = 0; v < y.size(); ++v) {
        const double t = (y[v].z() + 0.03) / 0.06;  // 0 bottom, 1 top
        const double ang = (t - 0.5) * (2.0 * kPi / 1.5);
        const Eigen::AngleAxisd rot(ang, Vec3::UnitZ());
        Vec3 p = y[v];
        const Vec3 c(0, 0, p.z());
        p = c + rot * (p - c);
        p.z() *= 0.7;  // squeeze while twisting
        y[v] = p;
    }
    f.y = std::move(y);
    f.benign = true;
    return f;
}

Fixture fixture_particles() {
    Fixture f;
    f.name = "particles";
    f.mesh.positions = {Vec3(-0.005, 0, 0), Vec3(0.005, 0, 0)};
    f.mesh.finalize();
    compute_lumped_masses(f.mesh, 0.0, 0.0);  // defaults to unit mass
    f.x = f.mesh.positions;
    f.y = {Vec3(0.005, 0, 0), Vec3(-0.005, 0, 0)};  // head-on swap
    f.benign = true;
    return f;
}

Fixture fixture_strand_cross(uint64_t seed) {
    (void)seed;
    Fixture f;
    f.name = "strand_cross";
    f.mesh = make_strand(6, Vec3(-0.03, 0, 0.002), Vec3(0.03, 0, 0.002));
    MeshState other = make_strand(6, Vec3(0, -0.03, 0), Vec3(0, 0.03, 0));
    compute_lumped_masses(f.mesh, 0.0, 0.05);
    compute_lumped_masses(other, 0.0, 0.05);
    append_mesh(f.mesh, other);
    f.x = f.mesh.positions;
    Positions y = f.x;
    for (int v = 0; v <= 6; ++v) y[v].z() -= 0.006;  // drag the top strand through
    f.y = std::move(y);
    f.benign = true;
    f.penetrating = false;  // strand-strand crossing is a codim-2 event
    return f;
}

Fixture fixture_random(uint64_t seed, int index) {
    std::mt19937_64 rng(seed * 1000003ull + static_cast<uint64_t>(index));
    std::uniform_real_distribution<double> uni(-1.0, 1.0);

    Fixture f;
    f.name = "random_" + std::to_string(index);
    f.mesh = make_grid_patch(6, 6, 0.05, 0.05, Vec3(-0.025, -0.025, 0.0), Vec3::UnitX(),
                             Vec3::UnitY());
    MeshState top = make_grid_patch(6, 6, 0.05, 0.05, Vec3(-0.024, -0.024, 0.004 + 0.002 * uni(rng)),
                                    Vec3::UnitX(), Vec3::UnitY());
    compute_lumped_masses(f.mesh, 0.1, 0.0);
    compute_lumped_masses(top, 0.1, 0.0);
    append_mesh(f.mesh, top);
    f.x = f.mesh.positions;

    // random rigid motion of the top sheet plus a bend of the bottom one
    const Vec3 axis(uni(rng), uni(rng), 1.5 + 0.5 * uni(rng));
    const double ang = (30.0 + 25.0 * uni(rng)) * kPi / 180.0;
    const Vec3 shift(0.004 * uni(rng), 0.004 * uni(rng), -0.008 + 0.004 * uni(rng));
    Positions y = f.x;
    Positions top_rot = rotate_about({y.begin() + 36, y.end()}, Vec3(0, 0, 0.004), axis, ang);
    for (size_t i = 0; i < top_rot.size(); ++i) y[36 + i] = top_rot[i] + shift;
    for (int v = 0; v < 36; ++v)
        y[v].z() += 0.003 * std::sin(3.0 * f.x[v].x() / 0.05) * uni(rng);
    f.y = std::move(y);
    f.benign = false;  // arbitrary targets, only safety is asserted
    f.penetrating = false;
    return f;
}

std::vector<Fixture> scene_fixtures(uint64_t seed) {
    std::vector<Fixture> out;
    for (double th : {0.0, 45.0, 90.0, 135.0}) out.push_back(fixture_spike_patch(th, seed));
    out.push_back(fixture_press(0.006, seed));
    out.push_back(fixture_press(0.012, seed));
    out.push_back(fixture_tube_twist(seed));
    out.push_back(fixture_particles());
    out.push_back(fixture_strand_cross(seed));
    for (int i = 0; i < 12; ++i) out.push_back(fixture_random(seed, i));
    return out;
}

}  // namespace twoway::testkit
