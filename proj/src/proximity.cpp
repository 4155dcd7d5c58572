#include "twoway/proximity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace twoway {

namespace {

// simplex identity: vertex id, edge index or triangle index
struct Entry {
    SimplexKind kind;
    int index;
};

struct Aabb {
    Vec3 lo, hi;
};

Aabb simplex_aabb(const Simplex& s, PositionsView x, double inflate) {
    Aabb box{x[s.idx[0]], x[s.idx[0]]};
    for (int i = 1; i < s.size(); ++i) {
        box.lo = box.lo.cwiseMin(x[s.idx[i]]);
        box.hi = box.hi.cwiseMax(x[s.idx[i]]);
    }
    box.lo.array() -= inflate;
    box.hi.array() += inflate;
    return box;
}

uint64_t pair_key(SimplexKind ka, int ia, SimplexKind kb, int ib) {
    return (static_cast<uint64_t>(ka) << 62) | (static_cast<uint64_t>(kb) << 60) |
           (static_cast<uint64_t>(static_cast<uint32_t>(ia)) << 30) |
           static_cast<uint64_t>(static_cast<uint32_t>(ib));
}

Simplex make_simplex(const MeshState& mesh, const Entry& e) {
    switch (e.kind) {
        case SimplexKind::Vertex:
            return Simplex::vertex(e.index);
        case SimplexKind::Edge:
            return Simplex::edge(mesh.edges[e.index][0], mesh.edges[e.index][1]);
        default:
            return Simplex::triangle(mesh.triangles[e.index][0], mesh.triangles[e.index][1],
                                     mesh.triangles[e.index][2]);
    }
}

}  // namespace

void ProximitySet::rebuild_vertex_index(int num_vertices) {
    vertex_pairs.assign(num_vertices, {});
    for (int p = 0; p < static_cast<int>(pairs.size()); ++p) {
        const auto& pr = pairs[p];
        auto touch = [&](const Simplex& s) {
            for (int i = 0; i < s.size(); ++i) vertex_pairs[s.idx[i]].push_back(p);
        };
        touch(pr.a);
        touch(pr.b);
    }
}

uint64_t HashGrid::hash_cell(int64_t x, int64_t y, int64_t z) {
    uint64_t h = static_cast<uint64_t>(x) * 0x9E3779B97F4A7C15ull;
    h ^= static_cast<uint64_t>(y) * 0xC2B2AE3D27D4EB4Full;
    h ^= static_cast<uint64_t>(z) * 0x165667B19E3779F9ull;
    h ^= h >> 29;
    h *= 0xBF58476D1CE4E5B9ull;
    h ^= h >> 32;
    return h;
}

ProximitySet proximity_search(PositionsView positions, const MeshState& mesh, double d_max) {
    if (d_max <= 0.0) throw std::invalid_argument("proximity_search: d_max must be > 0");

    ProximitySet set;
    set.bound = d_max;
    const int nv = mesh.num_vertices();
    if (nv == 0) {
        set.rebuild_vertex_index(0);
        return set;
    }

    // register simplices in all cells overlapped by their AABB inflated by d_max/2
    const double cell = d_max;
    std::unordered_map<uint64_t, std::vector<Entry>> grid;
    auto insert_entry = [&](const Entry& e, const Simplex& s) {
        const Aabb box = simplex_aabb(s, positions, 0.5 * d_max);
        const int64_t x0 = static_cast<int64_t>(std::floor(box.lo.x() / cell));
        const int64_t y0 = static_cast<int64_t>(std::floor(box.lo.y() / cell));
        const int64_t z0 = static_cast<int64_t>(std::floor(box.lo.z() / cell));
        const int64_t x1 = static_cast<int64_t>(std::floor(box.hi.x() / cell));
        const int64_t y1 = static_cast<int64_t>(std::floor(box.hi.y() / cell));
        const int64_t z1 = static_cast<int64_t>(std::floor(box.hi.z() / cell));
        for (int64_t x = x0; x <= x1; ++x)
            for (int64_t y = y0; y <= y1; ++y)
                for (int64_t z = z0; z <= z1; ++z)
                    grid[HashGrid::hash_cell(x, y, z)].push_back(e);
    };

    for (int v = 0; v < nv; ++v) insert_entry({SimplexKind::Vertex, v}, Simplex::vertex(v));
    for (int e = 0; e < static_cast<int>(mesh.edges.size()); ++e)
        insert_entry({SimplexKind::Edge, e}, make_simplex(mesh, {SimplexKind::Edge, e}));
    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t)
        insert_entry({SimplexKind::Triangle, t}, make_simplex(mesh, {SimplexKind::Triangle, t}));

    // canonical candidate kinds: VT always; EE always; VE/VV for isolated vertices
    auto candidate = [&](const Entry& x, const Entry& y, Entry& a, Entry& b) -> bool {
        using K = SimplexKind;
        const Entry *pv = nullptr, *po = nullptr;
        if (x.kind == K::Vertex) pv = &x, po = &y;
        else if (y.kind == K::Vertex) pv = &y, po = &x;
        if (x.kind == K::Edge && y.kind == K::Edge) {
            a = x.index <= y.index ? x : y;
            b = x.index <= y.index ? y : x;
            return a.index != b.index;
        }
        if (pv && po->kind == K::Triangle) {
            a = *pv;
            b = *po;
            return true;
        }
        if (pv && po->kind == K::Edge && mesh.is_isolated_vertex(pv->index)) {
            a = *pv;
            b = *po;
            return true;
        }
        if (x.kind == K::Vertex && y.kind == K::Vertex && mesh.is_isolated_vertex(x.index) &&
            mesh.is_isolated_vertex(y.index)) {
            a = x.index <= y.index ? x : y;
            b = x.index <= y.index ? y : x;
            return a.index != b.index;
        }
        return false;
    };

    std::unordered_set<uint64_t> dedup;
    struct RawPair {
        SimplexKind ka, kb;
        int ia, ib;
    };
    std::vector<RawPair> raw;
    for (const auto& [h, entries] : grid) {
        const size_t n = entries.size();
        for (size_t i = 0; i < n; ++i) {
            for (size_t j = i + 1; j < n; ++j) {
                Entry a, b;
                if (!candidate(entries[i], entries[j], a, b)) continue;
                const uint64_t key = pair_key(a.kind, a.index, b.kind, b.index);
                if (!dedup.insert(key).second) continue;
                raw.push_back({a.kind, b.kind, a.index, b.index});
            }
        }
    }
    std::sort(raw.begin(), raw.end(), [](const RawPair& l, const RawPair& r) {
        return std::tie(l.ka, l.kb, l.ia, l.ib) < std::tie(r.ka, r.kb, r.ia, r.ib);
    });

    for (const RawPair& rp : raw) {
        const Simplex sa = make_simplex(mesh, {rp.ka, rp.ia});
        const Simplex sb = make_simplex(mesh, {rp.kb, rp.ib});
        if (sa.shares_vertex(sb)) continue;
        auto res = simplex_pair_closest(sa, sb, positions);
        if (!res || res->distance >= d_max) continue;
        ProximityPair pp;
        pp.a = sa;
        pp.b = sb;
        pp.index_a = rp.ia;
        pp.index_b = rp.ib;
        pp.closest = *res;
        pp.active = true;
        bool all_static = true;
        for (int i = 0; i < sa.size(); ++i) all_static &= mesh.is_static(sa.idx[i]);
        for (int i = 0; i < sb.size(); ++i) all_static &= mesh.is_static(sb.idx[i]);
        pp.all_static = all_static;
        set.pairs.push_back(pp);
    }
    set.rebuild_vertex_index(nv);
    return set;
}

double shrink_bound(ProximitySet& set, double max_disp) {
    set.bound -= 2.0 * max_disp;
    return set.bound;
}

void refresh_distances(ProximitySet& set, PositionsView positions) {
    for (ProximityPair& p : set.pairs) {
        auto res = simplex_pair_closest(p.a, p.b, positions);
        if (!res) {
            p.active = false;
            continue;
        }
        if (res->degenerate && !p.closest.direction.isZero())
            res->direction = p.closest.direction;  // keep last good direction
        p.closest = *res;
        p.active = res->distance < set.bound;
    }
}

double per_vertex_bound(const ProximitySet& set, int vertex) {
    double d = set.bound;
    for (int pi : set.vertex_pairs[vertex]) {
        const ProximityPair& p = set.pairs[pi];
        if (p.active) d = std::min(d, p.closest.distance);
    }
    return d;
}

}  // namespace twoway
