#include "twoway/normal_flow.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace twoway {

namespace {
constexpr double kCotClamp = 1e-6;  // keeps near-degenerate triangles usable

double cotangent(const Vec3& a, const Vec3& b) {  // angle between a and b
    const double cross = a.cross(b).norm();
    return a.dot(b) / std::max(cross, 1e-18);
}
}  // namespace

void NormalFlowConfig::validate() const {
    if (!std::isfinite(beta)) throw std::invalid_argument("normal flow: beta must be finite");
    if (outer_iterations < 1) throw std::invalid_argument("normal flow: iterations must be >= 1");
}

void require_closed_manifold(const MeshState& mesh) {
    if (mesh.triangles.empty()) throw std::invalid_argument("normal flow: no triangles");
    std::map<std::pair<int, int>, int> directed;
    for (const auto& t : mesh.triangles)
        for (int k = 0; k < 3; ++k) {
            const int a = t[k], b = t[(k + 1) % 3];
            if (++directed[{a, b}] > 1)
                throw std::invalid_argument("normal flow: non-manifold edge (repeated direction)");
        }
    for (const auto& [e, cnt] : directed) {
        auto it = directed.find({e.second, e.first});
        if (it == directed.end() || it->second != 1)
            throw std::invalid_argument("normal flow: mesh is not closed/consistently oriented");
    }
}

Positions area_weighted_normals(const MeshState& mesh, PositionsView x) {
    Positions normals(x.size(), Vec3::Zero());
    for (const auto& t : mesh.triangles) {
        const Vec3 an = 0.5 * (x[t[1]] - x[t[0]]).cross(x[t[2]] - x[t[0]]);
        for (int k = 0; k < 3; ++k) normals[t[k]] += an;
    }
    for (Vec3& n : normals) {
        const double l = n.norm();
        if (l > 1e-18) n /= l;
    }
    return normals;
}

Positions normal_flow_target(const MeshState& mesh, PositionsView x, const NormalFlowConfig& cfg) {
    const Positions normals = area_weighted_normals(mesh, x);
    Positions y(x.begin(), x.end());
    for (size_t v = 0; v < y.size(); ++v) y[v] += cfg.beta * normals[v];

    // cotangent weights at the offset state, reused for the three passes
    std::map<std::pair<int, int>, double> weight;
    for (const auto& t : mesh.triangles)
        for (int k = 0; k < 3; ++k) {
            const int a = t[k], b = t[(k + 1) % 3], c = t[(k + 2) % 3];
            const double w = 0.5 * cotangent(y[a] - y[c], y[b] - y[c]);
            const auto key = std::minmax(a, b);
            weight[{key.first, key.second}] += w;
        }

    for (int pass = 0; pass < NormalFlowConfig::kSmoothingIterations; ++pass) {
        Positions lap(y.size(), Vec3::Zero());
        std::vector<double> wsum(y.size(), 0.0);
        for (const auto& [e, w_raw] : weight) {
            const double w = std::max(w_raw, kCotClamp);
            lap[e.first] += w * (y[e.second] - y[e.first]);
            lap[e.second] += w * (y[e.first] - y[e.second]);
            wsum[e.first] += w;
            wsum[e.second] += w;
        }
        for (size_t v = 0; v < y.size(); ++v)
            if (wsum[v] > 0.0) y[v] += cfg.alpha_smooth * lap[v] / wsum[v];  // Jacobi update
    }
    return y;
}

ResolveResult normal_flow_iteration(const MeshState& mesh, PositionsView x,
                                    const NormalFlowConfig& cfg, const ResolveConfig& rcfg) {
    cfg.validate();
    const Positions y = normal_flow_target(mesh, x, cfg);
    MeshState state = mesh;
    state.positions.assign(x.begin(), x.end());
    return resolve(x, y, state, rcfg);
}

}  // namespace twoway
