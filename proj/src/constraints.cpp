#include "twoway/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <unordered_map>

namespace twoway {

namespace {

constexpr double kMinRefVolume = 6.0 * 1e-18;  // det threshold for 1e-18 m^3 tetra volume
constexpr double kDiagFloor = 1e-10;

// scalar triple product of the stencil (p0, p1, p2, p3); 6x the signed volume
double stencil_det(const Vec3& p0, const Vec3& p1, const Vec3& p2, const Vec3& p3) {
    return (p1 - p0).dot((p2 - p0).cross(p3 - p0));
}

void stencil_det_gradient(const Vec3& p0, const Vec3& p1, const Vec3& p2, const Vec3& p3,
                          std::array<Vec3, 4>& g) {
    g[1] = (p2 - p0).cross(p3 - p0);
    g[2] = (p3 - p0).cross(p1 - p0);
    g[3] = (p1 - p0).cross(p2 - p0);
    g[0] = -(g[1] + g[2] + g[3]);
}

ConstraintKind kind_of_pair(const ProximityPair& pair) {
    using K = SimplexKind;
    if (pair.a.kind == K::Vertex && pair.b.kind == K::Triangle) return ConstraintKind::ContactVT;
    if (pair.a.kind == K::Edge && pair.b.kind == K::Edge) return ConstraintKind::ContactEE;
    if (pair.a.kind == K::Vertex && pair.b.kind == K::Edge) return ConstraintKind::ContactVE;
    return ConstraintKind::ContactVV;
}

}  // namespace

double constraint_value_at(const Constraint& c, PositionsView x) {
    switch (c.flavor) {
        case Constraint::Flavor::VolumeRatio:
            return stencil_det(x[c.verts[0]], x[c.verts[1]], x[c.verts[2]], x[c.verts[3]]) /
                       c.ref_volume -
                   1.0;
        case Constraint::Flavor::GapRatio: {
            Vec3 g = Vec3::Zero();
            for (int m = 0; m < c.nverts; ++m) g += c.gap_weights[m] * x[c.verts[m]];
            return g.norm() / c.denom - 1.0;
        }
        case Constraint::Flavor::LengthRatio:
            return c.sigma - (x[c.verts[0]] - x[c.verts[1]]).norm() / c.denom;
    }
    return 0.0;
}

Constraint build_gap_constraint(const ProximityPair& pair, PositionsView x, double delta,
                                ConstraintKind kind) {
    Constraint c;
    c.kind = kind;
    c.flavor = Constraint::Flavor::GapRatio;
    c.denom = delta;
    int n = 0;
    for (int i = 0; i < pair.a.size(); ++i, ++n) {
        c.verts[n] = pair.a.idx[i];
        c.gap_weights[n] = pair.closest.weights_a[i];
    }
    for (int i = 0; i < pair.b.size(); ++i, ++n) {
        c.verts[n] = pair.b.idx[i];
        c.gap_weights[n] = -pair.closest.weights_b[i];
    }
    c.nverts = n;
    c.value = pair.closest.distance / delta - 1.0;
    const Vec3 dir = pair.closest.direction;
    for (int m = 0; m < n; ++m) c.jac[m] = c.gap_weights[m] / delta * dir;
    return c;
}

Constraint build_vv_constraint(const ProximityPair& pair, PositionsView x, double delta) {
    return build_gap_constraint(pair, x, delta, ConstraintKind::ContactVV);
}

Constraint build_ve_constraint(const ProximityPair& pair, PositionsView x, double delta) {
    return build_gap_constraint(pair, x, delta, ConstraintKind::ContactVE);
}

Constraint build_vt_constraint(const ProximityPair& pair, PositionsView x, double delta) {
    const int va = pair.a.idx[0];
    const int i = pair.b.idx[0], j = pair.b.idx[1], k = pair.b.idx[2];

    Vec3 n = (x[j] - x[i]).cross(x[k] - x[i]);
    const double n_len = n.norm();
    if (n_len < 1e-20) return build_gap_constraint(pair, x, delta, ConstraintKind::ContactVT);
    n /= n_len;
    // orient towards the vertex side; the cached direction points triangle -> vertex
    if (n.dot(pair.closest.direction) < 0.0) n = -n;

    const double h = 0.5 * (delta - pair.closest.distance);
    const Vec3 ra = x[va] + h * n;
    const Vec3 ri = x[i] - h * n, rj = x[j] - h * n, rk = x[k] - h * n;
    const double wr = stencil_det(ra, ri, rj, rk);
    if (std::abs(wr) < kMinRefVolume)
        return build_gap_constraint(pair, x, delta, ConstraintKind::ContactVT);

    Constraint c;
    c.kind = ConstraintKind::ContactVT;
    c.flavor = Constraint::Flavor::VolumeRatio;
    c.nverts = 4;
    c.verts = {va, i, j, k};
    c.ref_volume = wr;
    c.value = stencil_det(x[va], x[i], x[j], x[k]) / wr - 1.0;
    std::array<Vec3, 4> g;
    stencil_det_gradient(x[va], x[i], x[j], x[k], g);
    for (int m = 0; m < 4; ++m) c.jac[m] = g[m] / wr;
    return c;
}

Constraint build_ee_constraint(const ProximityPair& pair, PositionsView x, double delta) {
    const int p1 = pair.a.idx[0], p2 = pair.a.idx[1];
    const int q1 = pair.b.idx[0], q2 = pair.b.idx[1];

    const Vec3 dir = pair.closest.direction;
    if (dir.isZero()) return build_gap_constraint(pair, x, delta, ConstraintKind::ContactEE);

    const double h = 0.5 * (delta - pair.closest.distance);
    const Vec3 rp1 = x[p1] + h * dir, rp2 = x[p2] + h * dir;
    const Vec3 rq1 = x[q1] - h * dir, rq2 = x[q2] - h * dir;
    const double wr = stencil_det(rp1, rp2, rq1, rq2);
    if (std::abs(wr) < kMinRefVolume)
        return build_gap_constraint(pair, x, delta, ConstraintKind::ContactEE);

    Constraint c;
    c.kind = ConstraintKind::ContactEE;
    c.flavor = Constraint::Flavor::VolumeRatio;
    c.nverts = 4;
    c.verts = {p1, p2, q1, q2};
    c.ref_volume = wr;
    c.value = stencil_det(x[p1], x[p2], x[q1], x[q2]) / wr - 1.0;
    std::array<Vec3, 4> g;
    stencil_det_gradient(x[p1], x[p2], x[q1], x[q2], g);
    for (int m = 0; m < 4; ++m) c.jac[m] = g[m] / wr;
    return c;
}

std::vector<Constraint> build_edge_length_constraints(const MeshState& mesh, PositionsView x,
                                                      const std::vector<double>& target_lengths,
                                                      double sigma) {
    std::vector<Constraint> out;
    out.reserve(mesh.edges.size());
    for (int e = 0; e < static_cast<int>(mesh.edges.size()); ++e) {
        const int i = mesh.edges[e][0], j = mesh.edges[e][1];
        const double ly = target_lengths[e];
        if (ly <= 1e-12) continue;  // zero-length target: skip
        if (mesh.is_static(i) && mesh.is_static(j)) continue;
        Constraint c;
        c.kind = ConstraintKind::EdgeLength;
        c.flavor = Constraint::Flavor::LengthRatio;
        c.nverts = 2;
        c.verts = {i, j, -1, -1};
        c.denom = ly;
        c.sigma = sigma;
        c.edge_index = e;
        const Vec3 d = x[i] - x[j];
        const double len = d.norm();
        c.value = sigma - len / ly;
        if (len > 1e-12) {
            const Vec3 u = d / len;
            c.jac[0] = -u / ly;
            c.jac[1] = u / ly;
        }
        out.push_back(c);
    }
    return out;
}

void fill_diag(Constraint& c, std::span<const double> inv_mass) {
    double d = 0.0;
    for (int m = 0; m < c.nverts; ++m) d += inv_mass[c.verts[m]] * c.jac[m].squaredNorm();
    c.diag = std::max(d, kDiagFloor);
}

std::vector<Constraint> linearize_all(const ProximitySet& set, PositionsView x,
                                      const MeshState& mesh,
                                      const std::vector<double>& edge_targets,
                                      const AssemblyOptions& opts) {
    std::vector<Constraint> out;
    for (int pi = 0; pi < static_cast<int>(set.pairs.size()); ++pi) {
        const ProximityPair& p = set.pairs[pi];
        if (!p.active || p.all_static) continue;
        if (p.closest.distance >= opts.delta) continue;  // activation window

        Constraint c;
        const ConstraintKind kind = kind_of_pair(p);
        if (opts.family == ConstraintFamily::Gap) {
            c = build_gap_constraint(p, x, opts.delta, kind);
        } else {
            switch (kind) {
                case ConstraintKind::ContactVT: c = build_vt_constraint(p, x, opts.delta); break;
                case ConstraintKind::ContactEE: c = build_ee_constraint(p, x, opts.delta); break;
                case ConstraintKind::ContactVE: c = build_ve_constraint(p, x, opts.delta); break;
                default: c = build_vv_constraint(p, x, opts.delta); break;
            }
        }
        double jnorm = 0.0;
        for (int m = 0; m < c.nverts; ++m) jnorm += c.jac[m].squaredNorm();
        if (jnorm < 1e-28) continue;  // fully degenerate row, nothing to actuate
        c.pair_index = pi;
        c.pair_key = p.key();
        fill_diag(c, mesh.inv_mass);
        out.push_back(c);
    }

    if (opts.edge_constraints) {
        auto edge_rows = build_edge_length_constraints(mesh, x, edge_targets, opts.sigma);
        for (Constraint& c : edge_rows) {
            fill_diag(c, mesh.inv_mass);
            out.push_back(c);
        }
    }
    return out;
}

int color_constraints(std::vector<Constraint>& constraints, std::span<const double> inv_mass,
                      uint64_t seed) {
    const int n = static_cast<int>(constraints.size());
    if (n == 0) return 0;

    // conflict adjacency through shared dynamic vertices
    std::unordered_map<int, std::vector<int>> vert_rows;
    for (int i = 0; i < n; ++i)
        for (int m = 0; m < constraints[i].nverts; ++m) {
            const int v = constraints[i].verts[m];
            if (inv_mass[v] > 0.0) vert_rows[v].push_back(i);
        }
    std::vector<std::vector<int>> adj(n);
    for (const auto& [v, rows] : vert_rows)
        for (size_t a = 0; a < rows.size(); ++a)
            for (size_t b = a + 1; b < rows.size(); ++b) {
                adj[rows[a]].push_back(rows[b]);
                adj[rows[b]].push_back(rows[a]);
            }
    for (auto& lst : adj) {
        std::sort(lst.begin(), lst.end());
        lst.erase(std::unique(lst.begin(), lst.end()), lst.end());
    }

    // randomized smallest-last ordering, then greedy smallest-fit in reverse
    std::mt19937_64 rng(seed);
    std::vector<int> degree(n), order;
    order.reserve(n);
    std::vector<bool> removed(n, false);
    int max_deg = 0;
    for (int i = 0; i < n; ++i) {
        degree[i] = static_cast<int>(adj[i].size());
        max_deg = std::max(max_deg, degree[i]);
    }
    std::vector<std::vector<int>> buckets(max_deg + 1);
    for (int i = 0; i < n; ++i) buckets[degree[i]].push_back(i);
    for (int picked = 0; picked < n; ++picked) {
        int d = 0, cand = -1;
        while (cand < 0) {
            while (buckets[d].empty()) ++d;
            auto& bkt = buckets[d];
            std::uniform_int_distribution<size_t> pick(0, bkt.size() - 1);  // random tie-break
            const size_t at = pick(rng);
            const int c = bkt[at];
            bkt[at] = bkt.back();
            bkt.pop_back();
            if (!removed[c] && degree[c] == d) cand = c;  // else stale, drop it
        }
        removed[cand] = true;
        order.push_back(cand);
        for (int nb : adj[cand])
            if (!removed[nb]) buckets[--degree[nb]].push_back(nb);
    }

    int ncolors = 0;
    std::vector<int> used(n + 1, -1);
    for (int it = n - 1; it >= 0; --it) {
        const int i = order[it];
        for (int nb : adj[i])
            if (constraints[nb].color >= 0) used[constraints[nb].color] = i;
        int col = 0;
        while (used[col] == i) ++col;
        constraints[i].color = col;
        ncolors = std::max(ncolors, col + 1);
    }
    return ncolors;
}

}  // namespace twoway
