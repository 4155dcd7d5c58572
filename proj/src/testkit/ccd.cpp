#include "twoway/testkit/ccd.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "twoway/testkit/dd.hpp"

namespace twoway::testkit {

namespace {

// ---------------------------------------------------------------------------
// swept-AABB candidate collection (independent of the production broad phase)
// ---------------------------------------------------------------------------

struct Box {
    Vec3 lo, hi;
};

bool overlap(const Box& a, const Box& b) {
    return (a.lo.array() <= b.hi.array()).all() && (b.lo.array() <= a.hi.array()).all();
}

Box swept_box(const Simplex& s, PositionsView x0, PositionsView x1, double inflate) {
    Box b{x0[s.idx[0]], x0[s.idx[0]]};
    for (int i = 0; i < s.size(); ++i) {
        b.lo = b.lo.cwiseMin(x0[s.idx[i]]).cwiseMin(x1[s.idx[i]]);
        b.hi = b.hi.cwiseMax(x0[s.idx[i]]).cwiseMax(x1[s.idx[i]]);
    }
    b.lo.array() -= inflate;
    b.hi.array() += inflate;
    return b;
}

uint64_t cell_hash(int64_t x, int64_t y, int64_t z) {
    uint64_t h = static_cast<uint64_t>(x) * 0x8DA6B343ull;
    h ^= static_cast<uint64_t>(y) * 0xD8163841ull + (h << 17);
    h ^= static_cast<uint64_t>(z) * 0xCB1AB31Full + (h >> 13);
    return h * 0x2545F4914F6CDD1Dull;
}

// boxes binned on a uniform grid; boxes spanning too many cells go to a
// global list that is checked against everything
struct BinnedBoxes {
    double cell = 1.0;
    std::unordered_map<uint64_t, std::vector<int>> bins;
    std::vector<int> global;
    std::vector<Box> boxes;

    void build(std::vector<Box> in, double cell_size) {
        boxes = std::move(in);
        cell = cell_size;
        for (int i = 0; i < static_cast<int>(boxes.size()); ++i) {
            const Box& b = boxes[i];
            const int64_t x0 = static_cast<int64_t>(std::floor(b.lo.x() / cell));
            const int64_t y0 = static_cast<int64_t>(std::floor(b.lo.y() / cell));
            const int64_t z0 = static_cast<int64_t>(std::floor(b.lo.z() / cell));
            const int64_t x1 = static_cast<int64_t>(std::floor(b.hi.x() / cell));
            const int64_t y1 = static_cast<int64_t>(std::floor(b.hi.y() / cell));
            const int64_t z1 = static_cast<int64_t>(std::floor(b.hi.z() / cell));
            const int64_t span = (x1 - x0 + 1) * (y1 - y0 + 1) * (z1 - z0 + 1);
            if (span > 4096) {
                global.push_back(i);
                continue;
            }
            for (int64_t x = x0; x <= x1; ++x)
                for (int64_t y = y0; y <= y1; ++y)
                    for (int64_t z = z0; z <= z1; ++z) bins[cell_hash(x, y, z)].push_back(i);
        }
    }
};

double pick_cell_size(const std::vector<Box>& a, const std::vector<Box>& b) {
    std::vector<double> ext;
    ext.reserve(a.size() + b.size());
    for (const Box& x : a) ext.push_back((x.hi - x.lo).maxCoeff());
    for (const Box& x : b) ext.push_back((x.hi - x.lo).maxCoeff());
    if (ext.empty()) return 1.0;
    // upper-quantile extent so that point-sized boxes cannot shrink the grid
    const size_t at = ext.size() * 9 / 10;
    std::nth_element(ext.begin(), ext.begin() + at, ext.end());
    return std::max(2.0 * ext[at], 1e-6);
}

// ---------------------------------------------------------------------------
// coplanarity cubic in double-double arithmetic
// ---------------------------------------------------------------------------

struct Cubic {
    DD c0, c1, c2, c3;
};

DD3 dd_point(const Vec3& v) { return {DD(v.x()), DD(v.y()), DD(v.z())}; }

// f(t) = det(u(t), v(t), w(t)) for linearly moving difference vectors
Cubic coplanarity_cubic(const Vec3& u0, const Vec3& du, const Vec3& v0, const Vec3& dv,
                        const Vec3& w0, const Vec3& dw) {
    const DD3 U0 = dd_point(u0), DU = dd_point(du);
    const DD3 V0 = dd_point(v0), DV = dd_point(dv);
    const DD3 W0 = dd_point(w0), DW = dd_point(dw);

    const DD3 A = dd_cross(U0, V0);
    DD3 B = dd_cross(U0, DV);
    const DD3 B2 = dd_cross(DU, V0);
    B = {B.x + B2.x, B.y + B2.y, B.z + B2.z};
    const DD3 C = dd_cross(DU, DV);

    Cubic c;
    c.c0 = dd_dot(A, W0);
    c.c1 = dd_dot(A, DW) + dd_dot(B, W0);
    c.c2 = dd_dot(B, DW) + dd_dot(C, W0);
    c.c3 = dd_dot(C, DW);
    return c;
}

DD eval_cubic(const Cubic& c, double t) {
    const DD T(t);
    return ((c.c3 * T + c.c2) * T + c.c1) * T + c.c0;
}

// real roots of a*t^2 + b*t + c in (0,1), stable form
void quadratic_roots01(double a, double b, double c, std::vector<double>& out) {
    if (std::abs(a) < 1e-300) {
        if (std::abs(b) > 1e-300) {
            const double r = -c / b;
            if (r > 0.0 && r < 1.0) out.push_back(r);
        }
        return;
    }
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return;
    const double sq = std::sqrt(disc);
    const double q = -0.5 * (b + (b >= 0.0 ? sq : -sq));
    const double r1 = q / a;
    const double r2 = std::abs(q) > 1e-300 ? c / q : r1;
    for (double r : {r1, r2})
        if (r > 0.0 && r < 1.0) out.push_back(r);
}

// roots of the cubic in [0,1] plus interior extrema (for grazing checks)
void cubic_roots01(const Cubic& c, std::vector<double>& roots, std::vector<double>& extrema) {
    std::vector<double> bps;
    quadratic_roots01(3.0 * c.c3.value(), 2.0 * c.c2.value(), c.c1.value(), bps);
    extrema = bps;
    bps.push_back(0.0);
    bps.push_back(1.0);
    std::sort(bps.begin(), bps.end());

    auto sign_at = [&](double t) { return eval_cubic(c, t).sign(); };
    for (size_t i = 0; i + 1 < bps.size(); ++i) {
        double a = bps[i], b = bps[i + 1];
        int sa = sign_at(a), sb = sign_at(b);
        if (sa == 0) {
            roots.push_back(a);
            continue;
        }
        if (sb == 0 || sa * sb > 0) continue;
        for (int it = 0; it < 100; ++it) {  // bisection on the DD sign
            const double m = 0.5 * (a + b);
            const int sm = sign_at(m);
            if (sm == 0) {
                a = b = m;
                break;
            }
            (sm == sa ? a : b) = m;
        }
        roots.push_back(0.5 * (a + b));
    }
    const int s1 = sign_at(1.0);
    if (s1 == 0) roots.push_back(1.0);
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end(),
                            [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                roots.end());
}

// ---------------------------------------------------------------------------
// root validation
// ---------------------------------------------------------------------------

enum class Hit { None, Uncertain, Certain };

constexpr double kInsideMargin = 1e-8;

Hit vt_inside_at(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    const Vec3 n = (b - a).cross(c - a);
    const double nn = n.squaredNorm();
    if (nn < 1e-40) return Hit::Uncertain;  // degenerate triangle at impact time
    const double la = (b - p).cross(c - p).dot(n) / nn;
    const double lb = (c - p).cross(a - p).dot(n) / nn;
    const double lc = (a - p).cross(b - p).dot(n) / nn;
    const double m = std::min({la, lb, lc});
    if (m > kInsideMargin) return Hit::Certain;
    if (m > -kInsideMargin) return Hit::Uncertain;
    return Hit::None;
}

Hit ee_inside_at(const Vec3& p1, const Vec3& p2, const Vec3& q1, const Vec3& q2) {
    const Vec3 d1 = p2 - p1, d2 = q2 - q1, r = q1 - p1;
    const Vec3 n = d1.cross(d2);
    const double nn = n.squaredNorm();
    const double scale2 = d1.squaredNorm() * d2.squaredNorm();
    if (nn < 1e-24 * scale2) {
        // parallel at impact time: touching only if the gap itself vanishes
        Vec3 gap = r;
        if (d1.squaredNorm() > 0) gap -= (r.dot(d1) / d1.squaredNorm()) * d1;
        return gap.norm() < 1e-9 ? Hit::Uncertain : Hit::None;
    }
    const double s = r.cross(d2).dot(n) / nn;
    const double u = r.cross(d1).dot(n) / nn;
    const double m = std::min({s, 1.0 - s, u, 1.0 - u});
    if (m > kInsideMargin) return Hit::Certain;
    if (m > -kInsideMargin) return Hit::Uncertain;
    return Hit::None;
}

Vec3 lerp_at(PositionsView x0, PositionsView x1, int v, double t) {
    return x0[v] + t * (x1[v] - x0[v]);
}

// ---------------------------------------------------------------------------
// the all-coefficients-zero path: stencil coplanar for every t
// ---------------------------------------------------------------------------

// checks whether all eight endpoint positions lie in one fixed plane; fills
// the plane basis when they do
bool common_fixed_plane(const std::array<Vec3, 4>& s, const std::array<Vec3, 4>& e, Vec3& origin,
                        Vec3& bu, Vec3& bv) {
    std::array<Vec3, 8> pts{s[0], s[1], s[2], s[3], e[0], e[1], e[2], e[3]};
    origin = pts[0];
    Vec3 n = Vec3::Zero();
    double scale = 0.0;
    for (int i = 1; i < 8; ++i) scale = std::max(scale, (pts[i] - origin).norm());
    if (scale == 0.0) {
        bu = Vec3::UnitX();
        bv = Vec3::UnitY();
        return true;
    }
    for (int i = 1; i < 8 && n.squaredNorm() < 1e-20 * scale * scale * scale * scale; ++i)
        for (int j = i + 1; j < 8; ++j) {
            const Vec3 cand = (pts[i] - origin).cross(pts[j] - origin);
            if (cand.squaredNorm() > n.squaredNorm()) n = cand;
        }
    if (n.squaredNorm() < 1e-24 * std::pow(scale, 4)) {
        // all points nearly collinear; any plane through the line works
        Vec3 d = Vec3::Zero();
        for (int i = 1; i < 8; ++i)
            if ((pts[i] - origin).squaredNorm() > d.squaredNorm()) d = pts[i] - origin;
        bu = d.normalized();
        Vec3 axis = std::abs(bu.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
        bv = bu.cross(axis).normalized();
        return true;
    }
    n.normalize();
    for (const Vec3& p : pts)
        if (std::abs((p - origin).dot(n)) > 1e-10 * std::max(scale, 1e-3)) return false;
    bu = (std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY()).cross(n).normalized();
    bv = n.cross(bu);
    return true;
}

using P2 = Eigen::Vector2d;

struct Lin2 {  // 2-D point moving linearly in t
    P2 p0, d;
    P2 at(double t) const { return p0 + t * d; }
};

// orient(a,b,c)(t) is quadratic in t; push its roots in (0,1)
void orient_roots(const Lin2& a, const Lin2& b, const Lin2& c, std::vector<double>& out) {
    const P2 u0 = b.p0 - a.p0, du = b.d - a.d;
    const P2 v0 = c.p0 - a.p0, dv = c.d - a.d;
    const double A = du.x() * dv.y() - du.y() * dv.x();
    const double B = u0.x() * dv.y() - u0.y() * dv.x() + du.x() * v0.y() - du.y() * v0.x();
    const double C = u0.x() * v0.y() - u0.y() * v0.x();
    quadratic_roots01(A, B, C, out);
}

double orient_at(const Lin2& a, const Lin2& b, const Lin2& c, double t) {
    const P2 pa = a.at(t), pb = b.at(t), pc = c.at(t);
    return (pb.x() - pa.x()) * (pc.y() - pa.y()) - (pb.y() - pa.y()) * (pc.x() - pa.x());
}

// planar segment-segment / point-triangle crossing over time, evaluated on
// the sign-constant intervals between orientation roots
Hit planar_ee_hit(const std::array<Lin2, 4>& m, double& t_hit) {
    std::vector<double> bps{0.0, 1.0};
    orient_roots(m[0], m[1], m[2], bps);
    orient_roots(m[0], m[1], m[3], bps);
    orient_roots(m[2], m[3], m[0], bps);
    orient_roots(m[2], m[3], m[1], bps);
    std::sort(bps.begin(), bps.end());
    Hit best = Hit::None;
    for (size_t i = 0; i + 1 < bps.size(); ++i) {
        const double t = 0.5 * (bps[i] + bps[i + 1]);
        const double o1 = orient_at(m[0], m[1], m[2], t);
        const double o2 = orient_at(m[0], m[1], m[3], t);
        const double o3 = orient_at(m[2], m[3], m[0], t);
        const double o4 = orient_at(m[2], m[3], m[1], t);
        if (o1 * o2 < 0.0 && o3 * o4 < 0.0) {
            const double mag = std::min(std::min(std::abs(o1), std::abs(o2)),
                                        std::min(std::abs(o3), std::abs(o4)));
            t_hit = t;
            if (mag > 1e-20) return Hit::Certain;
            best = Hit::Uncertain;
        }
    }
    return best;
}

Hit planar_vt_hit(const std::array<Lin2, 4>& m, double& t_hit) {
    // m[0] = vertex, m[1..3] = triangle
    std::vector<double> bps{0.0, 1.0};
    orient_roots(m[1], m[2], m[0], bps);
    orient_roots(m[2], m[3], m[0], bps);
    orient_roots(m[3], m[1], m[0], bps);
    std::sort(bps.begin(), bps.end());
    Hit best = Hit::None;
    for (size_t i = 0; i + 1 < bps.size(); ++i) {
        const double t = 0.5 * (bps[i] + bps[i + 1]);
        const double o1 = orient_at(m[1], m[2], m[0], t);
        const double o2 = orient_at(m[2], m[3], m[0], t);
        const double o3 = orient_at(m[3], m[1], m[0], t);
        const bool inside = (o1 >= 0 && o2 >= 0 && o3 >= 0) || (o1 <= 0 && o2 <= 0 && o3 <= 0);
        if (inside) {
            const double mag = std::min({std::abs(o1), std::abs(o2), std::abs(o3)});
            t_hit = t;
            if (mag > 1e-20) return Hit::Certain;
            best = Hit::Uncertain;
        }
    }
    return best;
}

}  // namespace

CcdReport ccd_certify(const PathSegment& seg) {
    CcdReport report;
    const MeshState& mesh = *seg.mesh;
    PositionsView x0 = seg.start, x1 = seg.end;

    const int nv = mesh.num_vertices();
    const int ne = static_cast<int>(mesh.edges.size());
    const int nt = static_cast<int>(mesh.triangles.size());

    std::vector<Box> vboxes(nv), eboxes(ne), tboxes(nt);
    for (int v = 0; v < nv; ++v) vboxes[v] = swept_box(Simplex::vertex(v), x0, x1, 1e-12);
    for (int e = 0; e < ne; ++e)
        eboxes[e] = swept_box(Simplex::edge(mesh.edges[e][0], mesh.edges[e][1]), x0, x1, 1e-12);
    for (int t = 0; t < nt; ++t)
        tboxes[t] = swept_box(
            Simplex::triangle(mesh.triangles[t][0], mesh.triangles[t][1], mesh.triangles[t][2]),
            x0, x1, 1e-12);

    auto check_stencil = [&](const Simplex& sa, const Simplex& sb, const std::array<int, 4>& ids,
                             bool is_vt) {
        std::array<Vec3, 4> s, e;
        for (int i = 0; i < 4; ++i) {
            s[i] = x0[ids[i]];
            e[i] = x1[ids[i]];
        }
        Cubic cub;
        if (is_vt) {
            // u = b - a, v = c - a, w = p - a with ids = {p, a, b, c}
            cub = coplanarity_cubic(s[2] - s[1], (e[2] - e[1]) - (s[2] - s[1]), s[3] - s[1],
                                    (e[3] - e[1]) - (s[3] - s[1]), s[0] - s[1],
                                    (e[0] - e[1]) - (s[0] - s[1]));
        } else {
            // u = p2 - p1, v = q2 - q1, w = q1 - p1 with ids = {p1, p2, q1, q2}
            cub = coplanarity_cubic(s[1] - s[0], (e[1] - e[0]) - (s[1] - s[0]), s[3] - s[2],
                                    (e[3] - e[2]) - (s[3] - s[2]), s[2] - s[0],
                                    (e[2] - e[0]) - (s[2] - s[0]));
        }

        const bool identically_zero = cub.c0.sign() == 0 && cub.c1.sign() == 0 &&
                                      cub.c2.sign() == 0 && cub.c3.sign() == 0;
        if (identically_zero) {
            Vec3 origin, bu, bv;
            double t_hit = 0.0;
            Hit h = Hit::None;
            if (common_fixed_plane(s, e, origin, bu, bv)) {
                std::array<Lin2, 4> m;
                for (int i = 0; i < 4; ++i) {
                    m[i].p0 = P2((s[i] - origin).dot(bu), (s[i] - origin).dot(bv));
                    const Vec3 d = e[i] - s[i];
                    m[i].d = P2(d.dot(bu), d.dot(bv));
                }
                h = is_vt ? planar_vt_hit(m, t_hit) : planar_ee_hit(m, t_hit);
            } else {
                // coplanar stencil in a moving plane: fall back to dense
                // touching-distance sampling, conservatively tagged uncertain
                for (int k = 0; k <= 32 && h == Hit::None; ++k) {
                    const double t = k / 32.0;
                    std::array<Vec3, 4> p;
                    for (int i = 0; i < 4; ++i) p[i] = s[i] + t * (e[i] - s[i]);
                    const Hit hh = is_vt ? vt_inside_at(p[0], p[1], p[2], p[3])
                                         : ee_inside_at(p[0], p[1], p[2], p[3]);
                    if (hh != Hit::None) {
                        h = Hit::Uncertain;
                        t_hit = t;
                    }
                }
            }
            if (h != Hit::None)
                report.violations.push_back({sa, sb, t_hit, h == Hit::Certain});
            return;
        }

        std::vector<double> roots, extrema;
        cubic_roots01(cub, roots, extrema);
        // grazing: vanishing-magnitude extremum without a sign change
        for (double t : extrema) {
            const DD f = eval_cubic(cub, t);
            if (f.sign() != 0 && std::abs(f.value()) < 1e-24) roots.push_back(t);
        }
        for (double t : roots) {
            std::array<Vec3, 4> p;
            for (int i = 0; i < 4; ++i) p[i] = lerp_at(x0, x1, ids[i], t);
            const Hit h =
                is_vt ? vt_inside_at(p[0], p[1], p[2], p[3]) : ee_inside_at(p[0], p[1], p[2], p[3]);
            if (h != Hit::None) {
                report.violations.push_back({sa, sb, t, h == Hit::Certain});
                return;  // one report per pair is enough
            }
        }
    };

    // vertex-triangle candidates
    {
        const double cell = pick_cell_size(vboxes, tboxes);
        BinnedBoxes tb;
        tb.build(tboxes, cell);
        std::unordered_set<uint64_t> seen;
        auto try_vt = [&](int v, int t) {
            const auto& tri = mesh.triangles[t];
            if (v == tri[0] || v == tri[1] || v == tri[2]) return;
            if (!overlap(vboxes[v], tb.boxes[t])) return;
            const uint64_t key = (static_cast<uint64_t>(v) << 32) | static_cast<uint64_t>(t);
            if (!seen.insert(key).second) return;
            check_stencil(Simplex::vertex(v), Simplex::triangle(tri[0], tri[1], tri[2]),
                          {v, tri[0], tri[1], tri[2]}, true);
        };
        for (int v = 0; v < nv; ++v) {
            const Box& b = vboxes[v];
            const int64_t cx0 = static_cast<int64_t>(std::floor(b.lo.x() / tb.cell));
            const int64_t cy0 = static_cast<int64_t>(std::floor(b.lo.y() / tb.cell));
            const int64_t cz0 = static_cast<int64_t>(std::floor(b.lo.z() / tb.cell));
            const int64_t cx1 = static_cast<int64_t>(std::floor(b.hi.x() / tb.cell));
            const int64_t cy1 = static_cast<int64_t>(std::floor(b.hi.y() / tb.cell));
            const int64_t cz1 = static_cast<int64_t>(std::floor(b.hi.z() / tb.cell));
            const int64_t span = (cx1 - cx0 + 1) * (cy1 - cy0 + 1) * (cz1 - cz0 + 1);
            if (span > 4096) {  // fast-moving probe: scan everything instead
                for (int t = 0; t < nt; ++t) try_vt(v, t);
                continue;
            }
            for (int64_t x = cx0; x <= cx1; ++x)
                for (int64_t y = cy0; y <= cy1; ++y)
                    for (int64_t z = cz0; z <= cz1; ++z) {
                        auto it = tb.bins.find(cell_hash(x, y, z));
                        if (it == tb.bins.end()) continue;
                        for (int t : it->second) try_vt(v, t);
                    }
            for (int t : tb.global) try_vt(v, t);
        }
    }

    // edge-edge candidates
    {
        const double cell = pick_cell_size(eboxes, eboxes);
        BinnedBoxes eb;
        eb.build(eboxes, cell);
        std::unordered_set<uint64_t> seen;
        auto try_ee = [&](int e1, int e2) {
            if (e1 >= e2) std::swap(e1, e2);
            if (e1 == e2) return;
            const auto &a = mesh.edges[e1], &b = mesh.edges[e2];
            if (a[0] == b[0] || a[0] == b[1] || a[1] == b[0] || a[1] == b[1]) return;
            if (!overlap(eb.boxes[e1], eb.boxes[e2])) return;
            const uint64_t key = (static_cast<uint64_t>(e1) << 32) | static_cast<uint64_t>(e2);
            if (!seen.insert(key).second) return;
            check_stencil(Simplex::edge(a[0], a[1]), Simplex::edge(b[0], b[1]),
                          {a[0], a[1], b[0], b[1]}, false);
        };
        for (const auto& [h, lst] : eb.bins)
            for (size_t i = 0; i < lst.size(); ++i)
                for (size_t j = i + 1; j < lst.size(); ++j) try_ee(lst[i], lst[j]);
        for (size_t g = 0; g < eb.global.size(); ++g) {
            for (size_t g2 = g + 1; g2 < eb.global.size(); ++g2) try_ee(eb.global[g], eb.global[g2]);
            for (int e = 0; e < ne; ++e)
                if (std::find(eb.global.begin(), eb.global.end(), e) == eb.global.end())
                    try_ee(eb.global[g], e);
        }
    }

    return report;
}

CcdReport ccd_certify_path(const std::vector<Positions>& states, const MeshState& mesh) {
    CcdReport all;
    for (size_t i = 0; i + 1 < states.size(); ++i) {
        PathSegment seg{states[i], states[i + 1], &mesh};
        CcdReport r = ccd_certify(seg);
        all.violations.insert(all.violations.end(), r.violations.begin(), r.violations.end());
    }
    return all;
}

}  // namespace twoway::testkit
