#include "twoway/distance.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace twoway {

namespace {

Vec3 safe_unit(const Vec3& v, bool& ok) {
    const double n = v.norm();
    ok = n > 1e-20;
    return ok ? Vec3(v / n) : Vec3::Zero();
}

// Any unit vector orthogonal to d.
Vec3 any_perpendicular(const Vec3& d) {
    Vec3 axis = std::abs(d.x()) < std::abs(d.y()) ? Vec3::UnitX() : Vec3::UnitY();
    if (std::abs(d.z()) < std::abs(axis.dot(d))) axis = Vec3::UnitZ();
    bool ok = false;
    Vec3 p = safe_unit(d.cross(axis), ok);
    return ok ? p : Vec3::UnitX();
}

}  // namespace

Vec3 weighted_point(const Simplex& s, const std::array<double, 3>& w, PositionsView positions) {
    Vec3 p = Vec3::Zero();
    for (int i = 0; i < s.size(); ++i) p += w[i] * positions[s.idx[i]];
    return p;
}

ClosestResult vertex_vertex_closest(const Vec3& p, const Vec3& q) {
    ClosestResult r;
    const Vec3 d = p - q;
    r.distance = d.norm();
    if (r.distance >= kDegenerateDistance) {
        r.direction = d / r.distance;
    } else {
        r.direction = Vec3::Zero();
        r.degenerate = true;
    }
    return r;
}

ClosestResult vertex_edge_closest(const Vec3& p, const Vec3& e0, const Vec3& e1) {
    ClosestResult r;
    const Vec3 d = e1 - e0;
    const double dd = d.squaredNorm();
    double t = dd > 0.0 ? (p - e0).dot(d) / dd : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const Vec3 c = e0 + t * d;
    r.weights_b = {1.0 - t, t, 0.0};
    const Vec3 gap = p - c;
    r.distance = gap.norm();
    if (r.distance >= kDegenerateDistance) {
        r.direction = gap / r.distance;
    } else {
        r.direction = any_perpendicular(d);
        r.degenerate = true;
    }
    return r;
}

std::optional<ClosestResult> vertex_triangle_closest(const Vec3& p, const Vec3& a, const Vec3& b,
                                                     const Vec3& c) {
    const Vec3 ab = b - a, ac = c - a;
    const Vec3 n = ab.cross(ac);
    if (0.5 * n.norm() <= kDegenerateTriArea) return std::nullopt;

    // Ericson, Real-Time Collision Detection, closest point on triangle.
    const Vec3 ap = p - a;
    const double d1 = ab.dot(ap), d2 = ac.dot(ap);
    std::array<double, 3> w{};
    Vec3 closest;
    bool done = false;
    if (d1 <= 0.0 && d2 <= 0.0) {
        closest = a;
        w = {1.0, 0.0, 0.0};
        done = true;
    }
    if (!done) {
        const Vec3 bp = p - b;
        const double d3 = ab.dot(bp), d4 = ac.dot(bp);
        if (d3 >= 0.0 && d4 <= d3) {
            closest = b;
            w = {0.0, 1.0, 0.0};
            done = true;
        }
        if (!done) {
            const double vc = d1 * d4 - d3 * d2;
            if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
                const double v = d1 / (d1 - d3);
                closest = a + v * ab;
                w = {1.0 - v, v, 0.0};
                done = true;
            }
        }
        if (!done) {
            const Vec3 cp = p - c;
            const double d5 = ab.dot(cp), d6 = ac.dot(cp);
            if (d6 >= 0.0 && d5 <= d6) {
                closest = c;
                w = {0.0, 0.0, 1.0};
                done = true;
            }
            if (!done) {
                const double vb = d5 * d2 - d1 * d6;
                if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
                    const double v = d2 / (d2 - d6);
                    closest = a + v * ac;
                    w = {1.0 - v, 0.0, v};
                    done = true;
                }
                if (!done) {
                    const double va = d3 * d6 - d5 * d4;
                    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
                        const double v = (d4 - d3) / ((d4 - d3) + (d5 - d6));
                        closest = b + v * (c - b);
                        w = {0.0, 1.0 - v, v};
                        done = true;
                    }
                }
            }
            if (!done) {
                const double vc = d1 * d4 - d3 * d2;
                const double vb = d5 * d2 - d1 * d6;
                const double va = d3 * d6 - d5 * d4;
                const double denom = va + vb + vc;
                const double v = vb / denom;
                const double u = vc / denom;
                closest = a + v * ab + u * ac;
                w = {1.0 - v - u, v, u};
                done = true;
            }
        }
    }

    ClosestResult r;
    r.weights_b = w;
    const Vec3 gap = p - closest;
    r.distance = gap.norm();
    if (r.distance >= kDegenerateDistance) {
        r.direction = gap / r.distance;
    } else {
        r.direction = n.normalized();
        r.degenerate = true;
    }
    return r;
}

std::optional<ClosestResult> edge_edge_closest(const Vec3& p1, const Vec3& p2, const Vec3& q1,
                                               const Vec3& q2) {
    const Vec3 d1 = p2 - p1, d2 = q2 - q1, rr = p1 - q1;
    const double a = d1.squaredNorm(), e = d2.squaredNorm(), f = d2.dot(rr);
    if (std::sqrt(a) <= kDegenerateEdgeLen || std::sqrt(e) <= kDegenerateEdgeLen)
        return std::nullopt;

    const double c = d1.dot(rr), b = d1.dot(d2);
    const double denom = a * e - b * b;

    double s, t;
    if (denom > 1e-12 * a * e) {
        s = std::clamp((b * f - c * e) / denom, 0.0, 1.0);
        t = (b * s + f) / e;
        if (t < 0.0) {
            t = 0.0;
            s = std::clamp(-c / a, 0.0, 1.0);
        } else if (t > 1.0) {
            t = 1.0;
            s = std::clamp((b - c) / a, 0.0, 1.0);
        }
    } else {
        // near-parallel: the minimum sits at an endpoint of one segment
        struct Cand {
            double s, t, d2;
        };
        auto point_on = [](const Vec3& o, const Vec3& d, double u) { return Vec3(o + u * d); };
        auto param = [](const Vec3& o, const Vec3& d, double dd, const Vec3& p) {
            return std::clamp((p - o).dot(d) / dd, 0.0, 1.0);
        };
        Cand best{0, 0, std::numeric_limits<double>::infinity()};
        const double cands_s[2] = {0.0, 1.0};
        for (double cs : cands_s) {
            const Vec3 ps = point_on(p1, d1, cs);
            const double ct = param(q1, d2, e, ps);
            const double dist2 = (ps - point_on(q1, d2, ct)).squaredNorm();
            if (dist2 < best.d2) best = {cs, ct, dist2};
        }
        for (double ct : cands_s) {
            const Vec3 qt = point_on(q1, d2, ct);
            const double cs = param(p1, d1, a, qt);
            const double dist2 = (point_on(p1, d1, cs) - qt).squaredNorm();
            if (dist2 < best.d2) best = {cs, ct, dist2};
        }
        s = best.s;
        t = best.t;
    }

    ClosestResult r;
    r.weights_a = {1.0 - s, s, 0.0};
    r.weights_b = {1.0 - t, t, 0.0};
    const Vec3 ca = p1 + s * d1, cb = q1 + t * d2;
    const Vec3 gap = ca - cb;
    r.distance = gap.norm();
    if (r.distance >= kDegenerateDistance) {
        r.direction = gap / r.distance;
    } else {
        bool ok = false;
        r.direction = safe_unit(d1.cross(d2), ok);
        if (!ok) r.direction = any_perpendicular(d1);
        r.degenerate = true;
    }
    return r;
}

std::optional<ClosestResult> simplex_pair_closest(const Simplex& sa, const Simplex& sb,
                                                  PositionsView positions) {
    if (sa.shares_vertex(sb))
        throw std::invalid_argument("simplex_pair_closest: adjacent pair");

    auto flipped = [](std::optional<ClosestResult> r) {
        if (r) {
            std::swap(r->weights_a, r->weights_b);
            r->direction = -r->direction;
        }
        return r;
    };

    const auto ka = sa.kind, kb = sb.kind;
    using K = SimplexKind;
    if (ka == K::Vertex && kb == K::Vertex)
        return vertex_vertex_closest(positions[sa.idx[0]], positions[sb.idx[0]]);
    if (ka == K::Vertex && kb == K::Edge)
        return vertex_edge_closest(positions[sa.idx[0]], positions[sb.idx[0]],
                                   positions[sb.idx[1]]);
    if (ka == K::Edge && kb == K::Vertex) return flipped(simplex_pair_closest(sb, sa, positions));
    if (ka == K::Vertex && kb == K::Triangle)
        return vertex_triangle_closest(positions[sa.idx[0]], positions[sb.idx[0]],
                                       positions[sb.idx[1]], positions[sb.idx[2]]);
    if (ka == K::Triangle && kb == K::Vertex) return flipped(simplex_pair_closest(sb, sa, positions));
    if (ka == K::Edge && kb == K::Edge) {
        // canonical operand order makes the query exactly symmetric
        const bool swap = std::tie(sb.idx[0], sb.idx[1]) < std::tie(sa.idx[0], sa.idx[1]);
        const Simplex& ea = swap ? sb : sa;
        const Simplex& eb = swap ? sa : sb;
        auto r = edge_edge_closest(positions[ea.idx[0]], positions[ea.idx[1]],
                                   positions[eb.idx[0]], positions[eb.idx[1]]);
        return swap ? flipped(std::move(r)) : r;
    }
    throw std::invalid_argument("simplex_pair_closest: no canonical primitive for pair kind");
}

}  // namespace twoway
