#include "twoway/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace twoway {

void MeshState::finalize() {
    const int n = num_vertices();
    if (velocities.size() != positions.size()) velocities.assign(n, Vec3::Zero());
    if (inv_mass.size() != positions.size()) inv_mass.assign(n, 1.0);

    std::map<std::pair<int, int>, int> seen;
    auto key = [](int a, int b) { return std::make_pair(std::min(a, b), std::max(a, b)); };
    for (const auto& e : edges) seen.emplace(key(e[0], e[1]), 1);
    for (const auto& e : strand_edges)
        if (seen.emplace(key(e[0], e[1]), 1).second) edges.push_back(e);
    for (const auto& t : triangles) {
        for (int k = 0; k < 3; ++k) {
            int a = t[k], b = t[(k + 1) % 3];
            if (seen.emplace(key(a, b), 1).second) edges.push_back({std::min(a, b), std::max(a, b)});
        }
    }

    vertex_triangles.assign(n, {});
    vertex_edges.assign(n, {});
    for (int t = 0; t < static_cast<int>(triangles.size()); ++t)
        for (int k = 0; k < 3; ++k) vertex_triangles[triangles[t][k]].push_back(t);
    for (int e = 0; e < static_cast<int>(edges.size()); ++e)
        for (int k = 0; k < 2; ++k) vertex_edges[edges[e][k]].push_back(e);
}

void MeshState::validate() const {
    const int n = num_vertices();
    if (velocities.size() != positions.size() || inv_mass.size() != positions.size())
        throw std::invalid_argument("mesh: velocity/mass arrays out of sync with positions");
    for (int v = 0; v < n; ++v) {
        if (!positions[v].allFinite()) throw std::invalid_argument("mesh: non-finite position");
        if (!std::isfinite(inv_mass[v]) || inv_mass[v] < 0.0)
            throw std::invalid_argument("mesh: inv_mass must be finite and >= 0");
    }
    for (const auto& e : edges) {
        if (e[0] < 0 || e[0] >= n || e[1] < 0 || e[1] >= n)
            throw std::invalid_argument("mesh: edge index out of range");
        if (e[0] == e[1]) throw std::invalid_argument("mesh: degenerate edge");
    }
    for (const auto& t : triangles) {
        for (int k = 0; k < 3; ++k)
            if (t[k] < 0 || t[k] >= n) throw std::invalid_argument("mesh: triangle index out of range");
        if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
            throw std::invalid_argument("mesh: degenerate triangle");
    }
}

void compute_lumped_masses(MeshState& mesh, double area_density, double line_density) {
    const int n = mesh.num_vertices();
    std::vector<double> mass(n, 0.0);
    for (const auto& t : mesh.triangles) {
        const Vec3 e1 = mesh.positions[t[1]] - mesh.positions[t[0]];
        const Vec3 e2 = mesh.positions[t[2]] - mesh.positions[t[0]];
        const double m = area_density * 0.5 * e1.cross(e2).norm();
        for (int k = 0; k < 3; ++k) mass[t[k]] += m / 3.0;
    }
    for (const auto& e : mesh.strand_edges) {
        const double m = line_density * (mesh.positions[e[1]] - mesh.positions[e[0]]).norm();
        mass[e[0]] += 0.5 * m;
        mass[e[1]] += 0.5 * m;
    }
    for (int v = 0; v < n; ++v) {
        if (mesh.inv_mass[v] == 0.0) continue;  // keep pinned vertices pinned
        mesh.inv_mass[v] = mass[v] > 0.0 ? 1.0 / mass[v] : 1.0;
    }
}

int append_mesh(MeshState& mesh, const MeshState& other) {
    const int off = mesh.num_vertices();
    mesh.positions.insert(mesh.positions.end(), other.positions.begin(), other.positions.end());
    mesh.velocities.insert(mesh.velocities.end(), other.velocities.begin(), other.velocities.end());
    mesh.inv_mass.insert(mesh.inv_mass.end(), other.inv_mass.begin(), other.inv_mass.end());
    for (const auto& t : other.triangles)
        mesh.triangles.push_back({t[0] + off, t[1] + off, t[2] + off});
    for (const auto& e : other.strand_edges)
        mesh.strand_edges.push_back({e[0] + off, e[1] + off});
    // plain (non-strand, non-triangle) edges carry over too
    for (const auto& e : other.edges) {
        bool from_tri = false;
        // cheap containment check is fine at finalize-time mesh sizes
        for (const auto& t : other.triangles) {
            for (int k = 0; k < 3; ++k) {
                int a = t[k], b = t[(k + 1) % 3];
                if ((std::min(a, b) == std::min(e[0], e[1])) && (std::max(a, b) == std::max(e[0], e[1])))
                    from_tri = true;
            }
            if (from_tri) break;
        }
        if (!from_tri) {
            bool strand = std::find(other.strand_edges.begin(), other.strand_edges.end(), e) !=
                          other.strand_edges.end();
            if (!strand) mesh.edges.push_back({e[0] + off, e[1] + off});
        }
    }
    mesh.finalize();
    return off;
}

}  // namespace twoway
