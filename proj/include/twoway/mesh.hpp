#pragma once

#include <array>
#include <string>

#include "twoway/types.hpp"

namespace twoway {

enum class SimplexKind : uint8_t { Vertex = 0, Edge = 1, Triangle = 2 };

/// One vertex, segment or triangle referenced by vertex ids.
struct Simplex {
    SimplexKind kind = SimplexKind::Vertex;
    std::array<int, 3> idx{-1, -1, -1};

    static Simplex vertex(int a) { return {SimplexKind::Vertex, {a, -1, -1}}; }
    static Simplex edge(int a, int b) { return {SimplexKind::Edge, {a, b, -1}}; }
    static Simplex triangle(int a, int b, int c) { return {SimplexKind::Triangle, {a, b, c}}; }

    int size() const { return static_cast<int>(kind) + 1; }
    bool shares_vertex(const Simplex& o) const {
        for (int i = 0; i < size(); ++i)
            for (int j = 0; j < o.size(); ++j)
                if (idx[i] == o.idx[j]) return true;
        return false;
    }
    bool operator==(const Simplex& o) const { return kind == o.kind && idx == o.idx; }
};

/// Vertex positions/velocities/masses plus topology. Vertices with
/// inv_mass = 0 are static colliders and never move.
struct MeshState {
    Positions positions;
    Positions velocities;
    std::vector<double> inv_mass;

    std::vector<std::array<int, 2>> edges;          // unique edges, triangle-derived + strands
    std::vector<std::array<int, 3>> triangles;
    std::vector<std::array<int, 2>> strand_edges;   // subset of `edges` written as OBJ lines

    // per-vertex incident simplex ids, built by finalize()
    std::vector<std::vector<int>> vertex_triangles;
    std::vector<std::vector<int>> vertex_edges;

    int num_vertices() const { return static_cast<int>(positions.size()); }
    bool is_static(int v) const { return inv_mass[v] == 0.0; }

    /// Derives unique edges from triangles (keeping explicit strand edges),
    /// builds adjacency, default-fills velocities/masses.
    void finalize();

    /// Throws std::invalid_argument if any structural invariant is broken.
    void validate() const;

    /// True when no vertex is referenced by any edge or triangle (a particle).
    bool is_isolated_vertex(int v) const {
        return vertex_edges[v].empty() && vertex_triangles[v].empty();
    }
};

/// mass += density * area / 3 per triangle vertex, density * length / 2 per
/// strand-segment endpoint. Vertices listed in `static_vertices` get inv_mass 0.
void compute_lumped_masses(MeshState& mesh, double area_density, double line_density);

/// Appends `other` to `mesh`, offsetting indices; returns the vertex offset.
int append_mesh(MeshState& mesh, const MeshState& other);

}  // namespace twoway
