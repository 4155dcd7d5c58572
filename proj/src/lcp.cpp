#include "twoway/lcp.hpp"

#include <algorithm>
#include <cmath>

namespace twoway {

LcpSystem assemble_lcp(std::vector<Constraint>& constraints, PositionsView x,
                       PositionsView y_target, std::span<const double> inv_mass, int num_colors) {
    LcpSystem sys;
    sys.constraints = &constraints;
    sys.inv_mass = inv_mass;
    sys.num_colors = num_colors;
    sys.impulse.assign(x.size(), Vec3::Zero());
    sys.target_gap.resize(constraints.size());
    for (size_t i = 0; i < constraints.size(); ++i) {
        const Constraint& c = constraints[i];
        double q = c.value;
        for (int m = 0; m < c.nverts; ++m)
            q += c.jac[m].dot(y_target[c.verts[m]] - x[c.verts[m]]);
        sys.target_gap[i] = q;
        if (c.lambda != 0.0) sys.add_impulse(static_cast<int>(i), c.lambda);  // warm start
    }
    return sys;
}

void pgs_sweeps(LcpSystem& sys, int n_iters) {
    auto& rows = *sys.constraints;
    for (int it = 0; it < n_iters; ++it) {
        for (int color = 0; color < sys.num_colors; ++color) {
            for (size_t i = 0; i < rows.size(); ++i) {
                Constraint& c = rows[i];
                if (c.color != color) continue;
                const double w = sys.target_gap[i] + sys.coupling(static_cast<int>(i));
                const double lam = std::max(0.0, c.lambda - w / c.diag);
                const double d = lam - c.lambda;
                if (d != 0.0) sys.add_impulse(static_cast<int>(i), d);
                c.lambda = lam;
            }
        }
    }
}

void projected_jacobi_sweeps(LcpSystem& sys, int n_iters, double under_relax) {
    auto& rows = *sys.constraints;
    std::vector<double> next(rows.size());
    for (int it = 0; it < n_iters; ++it) {
        for (size_t i = 0; i < rows.size(); ++i) {
            const Constraint& c = rows[i];
            const double w = sys.target_gap[i] + sys.coupling(static_cast<int>(i));
            next[i] = std::max(0.0, c.lambda - under_relax * w / c.diag);
        }
        for (size_t i = 0; i < rows.size(); ++i) {
            const double d = next[i] - rows[i].lambda;
            if (d != 0.0) sys.add_impulse(static_cast<int>(i), d);
            rows[i].lambda = next[i];
        }
    }
}

void al_gradient_descent(LcpSystem& sys, int n_inner) {
    auto& rows = *sys.constraints;
    const size_t n = rows.size();
    if (n == 0) return;

    // per-row penalty balancing the M-metric; see the shifted-penalty form
    // psi(c; lambda, rho) with multiplier update lambda <- max(0, lambda - rho c)
    std::vector<double> rho(n);
    for (size_t i = 0; i < n; ++i) rho[i] = 1.0 / rows[i].diag;

    auto row_value = [&](size_t i) {
        const Constraint& c = rows[i];
        double v = sys.target_gap[i];
        for (int m = 0; m < c.nverts; ++m) v += c.jac[m].dot(sys.impulse[c.verts[m]]);
        return v;  // c_lin(y) with y = y_target + impulse
    };

    // gradient of the AL in the M^-1-preconditioned metric:
    // d = impulse - sum_i M^-1 J_i^T max(0, lambda_i - rho_i c_i)
    Positions grad(sys.impulse.size());
    auto eval_grad = [&](bool with_multiplier_shift) {
        grad = sys.impulse;
        for (size_t i = 0; i < n; ++i) {
            const Constraint& c = rows[i];
            const double shift = with_multiplier_shift ? rows[i].lambda : 0.0;
            const double f = std::max(0.0, shift - rho[i] * row_value(i));
            if (f == 0.0) continue;
            for (int m = 0; m < c.nverts; ++m) {
                const int v = c.verts[m];
                grad[v] -= sys.inv_mass[v] * f * c.jac[m];
            }
        }
    };

    // step size via power iteration on I + M^-1 sum_i rho_i J_i^T J_i
    Positions z(sys.impulse.size());
    for (size_t v = 0; v < z.size(); ++v)
        z[v] = Vec3(0.3 + 0.1 * (v % 7), -0.2 + 0.05 * (v % 5), 0.15);
    double lam_max = 1.0;
    for (int pit = 0; pit < 8; ++pit) {
        Positions az = z;
        for (size_t i = 0; i < n; ++i) {
            const Constraint& c = rows[i];
            double jz = 0.0;
            for (int m = 0; m < c.nverts; ++m) jz += c.jac[m].dot(z[c.verts[m]]);
            for (int m = 0; m < c.nverts; ++m) {
                const int v = c.verts[m];
                az[v] += sys.inv_mass[v] * rho[i] * jz * c.jac[m];
            }
        }
        double nz = 0.0, na = 0.0;
        for (size_t v = 0; v < z.size(); ++v) {
            na += az[v].squaredNorm();
            nz += z[v].squaredNorm();
        }
        if (na <= 0.0 || nz <= 0.0) break;
        lam_max = std::sqrt(na / nz);
        const double inv = 1.0 / std::sqrt(na);
        for (size_t v = 0; v < z.size(); ++v) z[v] = az[v] * inv;
    }
    const double step = 0.9 / std::max(1.0, lam_max);

    for (int it = 0; it < n_inner; ++it) {
        eval_grad(true);
        for (size_t v = 0; v < sys.impulse.size(); ++v) sys.impulse[v] -= step * grad[v];
        for (size_t i = 0; i < n; ++i)
            rows[i].lambda = std::max(0.0, rows[i].lambda - rho[i] * row_value(i));
    }
}

Positions recover_target(const LcpSystem& sys, PositionsView y_target) {
    Positions y(y_target.begin(), y_target.end());
    for (size_t v = 0; v < y.size(); ++v)
        if (sys.inv_mass[v] > 0.0) y[v] += sys.impulse[v];
    return y;
}

}  // namespace twoway
