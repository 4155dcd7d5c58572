#pragma once

#include <cstdint>

#include "twoway/distance.hpp"
#include "twoway/mesh.hpp"

namespace twoway {

/// A non-adjacent simplex pair with its cached closest-point result.
struct ProximityPair {
    Simplex a, b;
    int index_a = -1, index_b = -1;  // vertex id / edge index / triangle index
    ClosestResult closest;
    bool active = true;   // distance < current bound after the last refresh
    bool all_static = false;

    /// Exact identity, stable across searches while topology is fixed.
    uint64_t key() const {
        return (static_cast<uint64_t>(a.kind) << 62) | (static_cast<uint64_t>(b.kind) << 60) |
               (static_cast<uint64_t>(static_cast<uint32_t>(index_a)) << 30) |
               static_cast<uint64_t>(static_cast<uint32_t>(index_b));
    }
};

/// The reusable pair set P with its validity bound D (meters).
struct ProximitySet {
    std::vector<ProximityPair> pairs;
    double bound = 0.0;
    std::vector<std::vector<int>> vertex_pairs;  // vertex id -> pair indices

    bool needs_refresh(double d_min) const { return bound < d_min; }
    void rebuild_vertex_index(int num_vertices);
};

/// Grid-based spatial hash over simplex AABBs inflated by half the cell size.
struct HashGrid {
    double cell = 0.0;
    HashGrid(double cell_size) : cell(cell_size) {}
    static uint64_t hash_cell(int64_t x, int64_t y, int64_t z);
};

/// Collects every non-adjacent canonical pair (VT, EE, plus VE/VV for
/// isolated vertices) with distance < d_max. Deterministic: pairs come out
/// canonically sorted.
ProximitySet proximity_search(PositionsView positions, const MeshState& mesh, double d_max);

/// Alg.-1 bound update: bound -= 2 * max_disp. Returns the new bound; the
/// caller must run a fresh search once it drops below D^min.
double shrink_bound(ProximitySet& set, double max_disp);

/// Recomputes every cached closest result at `positions`. Pairs whose
/// distance reaches the bound are kept but flagged inactive. A pair whose new
/// result is degenerate keeps its previous direction when that one was valid.
void refresh_distances(ProximitySet& set, PositionsView positions);

/// min(bound, min over active pairs touching `vertex` of their distance);
/// pair-less vertices get the global bound.
double per_vertex_bound(const ProximitySet& set, int vertex);

}  // namespace twoway
