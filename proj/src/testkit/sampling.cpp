#include "twoway/testkit/sampling.hpp"

#include <algorithm>
#include <cmath>

namespace twoway::testkit {

namespace {

int param_dim(const Simplex& s) { return s.size() - 1; }

void clamp_params(const Simplex& s, double* p) {
    if (s.kind == SimplexKind::Edge) {
        p[0] = std::clamp(p[0], 0.0, 1.0);
    } else if (s.kind == SimplexKind::Triangle) {
        // Euclidean projection onto {u >= 0, v >= 0, u + v <= 1}
        double u = p[0], v = p[1];
        if (u + v > 1.0) {
            const double t = 0.5 * (u + v - 1.0);
            u -= t;
            v -= t;
        }
        if (u < 0.0) {
            u = 0.0;
            v = std::clamp(v, 0.0, 1.0);
        }
        if (v < 0.0) {
            v = 0.0;
            u = std::clamp(u, 0.0, 1.0);
        }
        if (u + v > 1.0) {  // corner case after axis clamps
            const double t = 0.5 * (u + v - 1.0);
            u -= t;
            v -= t;
        }
        p[0] = u;
        p[1] = v;
    }
}

Vec3 point_at(const Simplex& s, PositionsView x, const double* p) {
    switch (s.kind) {
        case SimplexKind::Vertex:
            return x[s.idx[0]];
        case SimplexKind::Edge:
            return x[s.idx[0]] + p[0] * (x[s.idx[1]] - x[s.idx[0]]);
        default:
            return x[s.idx[0]] + p[0] * (x[s.idx[1]] - x[s.idx[0]]) +
                   p[1] * (x[s.idx[2]] - x[s.idx[0]]);
    }
}

}  // namespace

double sampled_pair_distance(const Simplex& a, const Simplex& b, PositionsView x, int grid,
                             double refine_tol) {
    const int da = param_dim(a), db = param_dim(b);
    const int dim = da + db;

    double best[4] = {0, 0, 0, 0};
    double best_d = std::numeric_limits<double>::infinity();

    // projects p into the joint parameter domain in place, then evaluates
    auto distance_at = [&](double* p) {
        double pa[2] = {p[0], p[1]}, pb[2] = {p[da], p[da + 1]};
        clamp_params(a, pa);
        clamp_params(b, pb);
        for (int k = 0; k < da; ++k) p[k] = pa[k];
        for (int k = 0; k < db; ++k) p[da + k] = pb[k];
        return (point_at(a, x, pa) - point_at(b, x, pb)).norm();
    };

    // dense grid over the joint parameter cube (triangle params clamped in)
    int counts[4] = {1, 1, 1, 1};
    for (int k = 0; k < dim; ++k) counts[k] = grid + 1;
    double p[4] = {0, 0, 0, 0};
    for (int i0 = 0; i0 < counts[0]; ++i0)
        for (int i1 = 0; i1 < counts[1]; ++i1)
            for (int i2 = 0; i2 < counts[2]; ++i2)
                for (int i3 = 0; i3 < counts[3]; ++i3) {
                    const int idx[4] = {i0, i1, i2, i3};
                    for (int k = 0; k < dim; ++k) p[k] = static_cast<double>(idx[k]) / grid;
                    const double d = distance_at(p);
                    if (d < best_d) {
                        best_d = d;
                        std::copy(p, p + 4, best);
                    }
                }

    // local refinement: re-sample a box around the running best, shrinking
    // only when a same-size box brings no improvement (the target function is
    // convex over the clamped parameter domain, so this cannot stall)
    double h = 1.0 / grid;
    while (h > refine_tol) {
        const int sub = 6;
        const double before = best_d;
        double center[4];
        std::copy(best, best + 4, center);
        int idx[4] = {0, 0, 0, 0};
        const int lim[4] = {dim > 0 ? 2 * sub + 1 : 1, dim > 1 ? 2 * sub + 1 : 1,
                            dim > 2 ? 2 * sub + 1 : 1, dim > 3 ? 2 * sub + 1 : 1};
        for (idx[0] = 0; idx[0] < lim[0]; ++idx[0])
            for (idx[1] = 0; idx[1] < lim[1]; ++idx[1])
                for (idx[2] = 0; idx[2] < lim[2]; ++idx[2])
                    for (idx[3] = 0; idx[3] < lim[3]; ++idx[3]) {
                        double q[4];
                        for (int k = 0; k < 4; ++k)
                            q[k] = center[k] + (k < dim ? (idx[k] - sub) * h / sub : 0.0);
                        const double d = distance_at(q);
                        if (d < best_d) {
                            best_d = d;
                            std::copy(q, q + 4, best);
                        }
                    }
        if (before - best_d <= 1e-15 * (1.0 + before)) h *= 0.35;
    }
    return best_d;
}

}  // namespace twoway::testkit
