#include "twoway/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace twoway {

void EnergyModel::validate() const {
    if (spring_stiffness < 0.0 || bending_stiffness < 0.0 || repulsion_stiffness < 0.0)
        throw std::invalid_argument("dynamics: stiffnesses must be >= 0");
    if (!(dt > 0.0)) throw std::invalid_argument("dynamics: dt must be > 0");
    if (newton_iters < 1) throw std::invalid_argument("dynamics: newton_iters must be >= 1");
}

void EnergyModel::prepare(const MeshState& mesh) {
    validate();
    rest_lengths.resize(mesh.edges.size());
    for (size_t e = 0; e < mesh.edges.size(); ++e)
        rest_lengths[e] = (mesh.positions[mesh.edges[e][0]] - mesh.positions[mesh.edges[e][1]]).norm();

    hinges.clear();
    if (bending_stiffness <= 0.0) return;

    std::map<std::pair<int, int>, std::vector<int>> edge_tris;
    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t)
        for (int k = 0; k < 3; ++k) {
            int a = mesh.triangles[t][k], b = mesh.triangles[t][(k + 1) % 3];
            edge_tris[{std::min(a, b), std::max(a, b)}].push_back(t);
        }
    for (const auto& [e, tris] : edge_tris) {
        if (tris.size() != 2) continue;
        auto opposite = [&](int t) {
            for (int k = 0; k < 3; ++k) {
                const int v = mesh.triangles[t][k];
                if (v != e.first && v != e.second) return v;
            }
            return -1;
        };
        Hinge h;
        h.v = {e.first, e.second, opposite(tris[0]), opposite(tris[1])};

        // flat-rest coefficient vector: null space of [1; in-plane rest coords]
        const Vec3 x0 = mesh.positions[h.v[0]];
        const Vec3 e1v = mesh.positions[h.v[1]] - x0;
        Vec3 n = e1v.cross(mesh.positions[h.v[2]] - x0);
        if (n.squaredNorm() < 1e-24 || e1v.squaredNorm() < 1e-24) continue;
        n.normalize();
        const Vec3 bu = e1v.normalized();
        const Vec3 bv = n.cross(bu);
        Eigen::Matrix<double, 3, 4> M;
        for (int i = 0; i < 4; ++i) {
            const Vec3 d = mesh.positions[h.v[i]] - x0;
            M(0, i) = 1.0;
            M(1, i) = d.dot(bu);
            M(2, i) = d.dot(bv);
        }
        Eigen::FullPivLU<Eigen::Matrix<double, 3, 4>> lu(M);
        lu.setThreshold(1e-9);
        if (lu.dimensionOfKernel() != 1) continue;
        Eigen::Vector4d k = lu.kernel().col(0);
        k.normalize();
        h.k = {k(0), k(1), k(2), k(3)};
        hinges.push_back(h);
    }
}

namespace {

// inertia target x^t + dt v^t + dt^2 g
Vec3 inertia_target(const EnergyModel& m, const MeshState& mesh, int v) {
    return mesh.positions[v] + m.dt * mesh.velocities[v] + m.dt * m.dt * m.gravity;
}

void add_block(std::vector<Eigen::Triplet<double>>& trips, int vi, int vj, const Mat3& block) {
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            if (block(r, c) != 0.0) trips.emplace_back(3 * vi + r, 3 * vj + c, block(r, c));
}

}  // namespace

Eigen::SparseMatrix<double> GradientHessian::assemble(int n) const {
    Eigen::SparseMatrix<double> H(3 * n, 3 * n);
    H.setFromTriplets(trips.begin(), trips.end());
    return H;
}

double incremental_energy(const EnergyModel& model, const MeshState& mesh, PositionsView x) {
    const double inv_dt2 = 1.0 / (model.dt * model.dt);
    double e = 0.0;
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        if (mesh.is_static(v)) continue;
        const double m = 1.0 / mesh.inv_mass[v];
        e += 0.5 * m * inv_dt2 * (x[v] - inertia_target(model, mesh, v)).squaredNorm();
    }
    for (size_t ei = 0; ei < mesh.edges.size(); ++ei) {
        const double l = (x[mesh.edges[ei][0]] - x[mesh.edges[ei][1]]).norm();
        const double s = l - model.rest_lengths[ei];
        e += 0.5 * model.spring_stiffness * s * s;
    }
    for (const auto& h : model.hinges) {
        Vec3 c = Vec3::Zero();
        for (int i = 0; i < 4; ++i) c += h.k[i] * x[h.v[i]];
        e += 0.5 * model.bending_stiffness * c.squaredNorm();
    }
    return e;
}

GradientHessian gradient_and_hessian(const EnergyModel& model, const MeshState& mesh,
                                     PositionsView x) {
    const int n = mesh.num_vertices();
    GradientHessian gh;
    gh.gradient = Eigen::VectorXd::Zero(3 * n);
    const double inv_dt2 = 1.0 / (model.dt * model.dt);

    for (int v = 0; v < n; ++v) {
        if (mesh.is_static(v)) {
            add_block(gh.trips, v, v, Mat3::Identity());
            continue;
        }
        const double m = 1.0 / mesh.inv_mass[v];
        const Vec3 g = m * inv_dt2 * (x[v] - inertia_target(model, mesh, v));
        gh.gradient.segment<3>(3 * v) += g;
        add_block(gh.trips, v, v, m * inv_dt2 * Mat3::Identity());
    }

    for (size_t ei = 0; ei < mesh.edges.size(); ++ei) {
        const int i = mesh.edges[ei][0], j = mesh.edges[ei][1];
        if (mesh.is_static(i) && mesh.is_static(j)) continue;
        const Vec3 d = Vec3(x[i] - x[j]);
        const double l = d.norm();
        if (l < 1e-12) continue;
        const Vec3 u = d / l;
        const double k = model.spring_stiffness;
        const double strain = l - model.rest_lengths[ei];
        const Vec3 f = k * strain * u;
        if (!mesh.is_static(i)) gh.gradient.segment<3>(3 * i) += f;
        if (!mesh.is_static(j)) gh.gradient.segment<3>(3 * j) -= f;

        // analytic PSD projection: clamp the (1 - L0/l) transverse eigenvalue
        const Mat3 uu = u * u.transpose();
        const Mat3 block = k * (uu + std::max(0.0, 1.0 - model.rest_lengths[ei] / l) *
                                         (Mat3::Identity() - uu));
        if (!mesh.is_static(i)) add_block(gh.trips, i, i, block);
        if (!mesh.is_static(j)) add_block(gh.trips, j, j, block);
        if (!mesh.is_static(i) && !mesh.is_static(j)) {
            add_block(gh.trips, i, j, -block);
            add_block(gh.trips, j, i, -block);
        }
    }

    for (const auto& h : model.hinges) {
        Vec3 c = Vec3::Zero();
        for (int i = 0; i < 4; ++i) c += h.k[i] * x[h.v[i]];
        for (int i = 0; i < 4; ++i) {
            if (mesh.is_static(h.v[i])) continue;
            gh.gradient.segment<3>(3 * h.v[i]) += model.bending_stiffness * h.k[i] * c;
            for (int j = 0; j < 4; ++j) {
                if (mesh.is_static(h.v[j])) continue;
                add_block(gh.trips, h.v[i], h.v[j],
                          model.bending_stiffness * h.k[i] * h.k[j] * Mat3::Identity());
            }
        }
    }
    return gh;
}

void add_repulsion(const EnergyModel& model, const ProximitySet& set, PositionsView x,
                   GradientHessian& gh) {
    (void)x;
    const double k = model.repulsion_stiffness;
    if (k <= 0.0) return;
    for (const ProximityPair& p : set.pairs) {
        if (!p.active || p.all_static) continue;
        const double depth = model.repulsion_radius - p.closest.distance;
        if (depth <= 0.0) continue;
        const Vec3 dir = p.closest.direction;
        if (dir.isZero()) continue;

        std::array<int, 8> vid;
        std::array<double, 8> sw;  // signed weights
        int m = 0;
        for (int i = 0; i < p.a.size(); ++i, ++m) {
            vid[m] = p.a.idx[i];
            sw[m] = p.closest.weights_a[i];
        }
        for (int i = 0; i < p.b.size(); ++i, ++m) {
            vid[m] = p.b.idx[i];
            sw[m] = -p.closest.weights_b[i];
        }
        // E = 1/2 k depth^2, d(depth)/dx_m = -sw_m dir
        const Mat3 gn = k * dir * dir.transpose();
        for (int a = 0; a < m; ++a) {
            if (sw[a] == 0.0) continue;
            gh.gradient.segment<3>(3 * vid[a]) += -k * depth * sw[a] * dir;
            for (int b = 0; b < m; ++b)
                if (sw[b] != 0.0) add_block(gh.trips, vid[a], vid[b], sw[a] * sw[b] * gn);
        }
    }
}

NewtonResult newton_target(const EnergyModel& model, const MeshState& mesh, PositionsView x,
                           const GradientHessian& gh) {
    const int n = mesh.num_vertices();
    NewtonResult out;
    out.y.assign(x.begin(), x.end());

    Eigen::VectorXd b = -gh.gradient;
    for (int v = 0; v < n; ++v)
        if (mesh.is_static(v)) b.segment<3>(3 * v).setZero();
    const double bnorm = b.norm();
    if (bnorm == 0.0) return out;

    Eigen::SparseMatrix<double> H = gh.assemble(n);

    // 3x3 block-Jacobi preconditioner
    std::vector<Mat3> pre(n, Mat3::Identity());
    for (int v = 0; v < n; ++v) {
        Mat3 blk = Mat3::Zero();
        for (int r = 0; r < 3; ++r)
            for (Eigen::SparseMatrix<double>::InnerIterator it(H, 3 * v + r); it; ++it) {
                // column-major: it.row() runs over rows of column 3v+r
                const int rr = static_cast<int>(it.row()) - 3 * v;
                if (rr >= 0 && rr < 3) blk(rr, r) = it.value();
            }
        const Eigen::LDLT<Mat3> ldlt(blk);
        if (ldlt.info() == Eigen::Success) pre[v] = ldlt.solve(Mat3::Identity());
    }
    auto precond = [&](const Eigen::VectorXd& r) {
        Eigen::VectorXd z(r.size());
        for (int v = 0; v < n; ++v) z.segment<3>(3 * v) = pre[v] * r.segment<3>(3 * v);
        return z;
    };

    Eigen::VectorXd d = Eigen::VectorXd::Zero(3 * n);
    Eigen::VectorXd r = b;
    Eigen::VectorXd z = precond(r);
    Eigen::VectorXd p = z;
    double rz = r.dot(z);
    Eigen::VectorXd best = d;
    double best_res = r.norm();
    const int kMaxIters = model.pcg_max_iters;
    const double kRelTol = model.pcg_tol;
    int it = 0;
    for (; it < kMaxIters && best_res > kRelTol * bnorm; ++it) {
        const Eigen::VectorXd Hp = H * p;
        const double pHp = p.dot(Hp);
        if (pHp <= 0.0) break;  // PSD-projected system, but guard anyway
        const double alpha = rz / pHp;
        d += alpha * p;
        r -= alpha * Hp;
        const double res = r.norm();
        if (res < best_res) {
            best_res = res;
            best = d;
        }
        z = precond(r);
        const double rz_next = r.dot(z);
        p = z + (rz_next / rz) * p;
        rz = rz_next;
    }
    out.pcg_iterations = it;
    out.pcg_converged = best_res <= kRelTol * bnorm;

    for (int v = 0; v < n; ++v)
        if (!mesh.is_static(v)) out.y[v] += best.segment<3>(3 * v);
    return out;
}

Positions friction_filter(const EnergyModel& model, const MeshState& mesh, PositionsView x,
                          PositionsView y_target, const ProximitySet& set) {
    Positions y(y_target.begin(), y_target.end());
    if (model.mu < 0.0) throw std::invalid_argument("dynamics: mu must be >= 0");
    const double dt = model.dt;

    for (const ProximityPair& p : set.pairs) {
        if (p.all_static) continue;
        auto res = simplex_pair_closest(p.a, p.b, y);  // penetration at the target state
        if (!res) continue;
        const double depth = model.repulsion_radius - res->distance;
        if (depth <= 0.0) continue;
        Vec3 n = res->direction;
        if (n.isZero()) n = p.closest.direction;
        if (n.isZero()) continue;

        std::array<int, 8> vid;
        std::array<double, 8> sw;
        int m = 0;
        for (int i = 0; i < p.a.size(); ++i, ++m) {
            vid[m] = p.a.idx[i];
            sw[m] = res->weights_a[i];
        }
        for (int i = 0; i < p.b.size(); ++i, ++m) {
            vid[m] = p.b.idx[i];
            sw[m] = -res->weights_b[i];
        }

        double kappa = 0.0;
        Vec3 v_rel = Vec3::Zero();
        for (int a = 0; a < m; ++a) {
            kappa += sw[a] * sw[a] * mesh.inv_mass[vid[a]];
            v_rel += sw[a] * (y[vid[a]] - x[vid[a]]) / dt;
        }
        if (kappa <= 0.0) continue;

        // inelastic normal impulse, capped by the depth rate so a resting
        // stack neither sinks nor climbs
        const double vn = v_rel.dot(n);
        const double jn = std::clamp(-vn, 0.0, depth / dt);
        Vec3 impulse = jn * n;
        const Vec3 vt = v_rel - vn * n;
        const double vt_norm = vt.norm();
        if (vt_norm > 1e-12) {
            const double dvt = std::min(model.mu * jn, vt_norm);
            impulse -= dvt * (vt / vt_norm);
        }
        const Vec3 dv = impulse / kappa;
        for (int a = 0; a < m; ++a)
            y[vid[a]] += dt * mesh.inv_mass[vid[a]] * sw[a] * dv;
    }
    return y;
}

StepStats step(const EnergyModel& model, MeshState& mesh, const ResolveConfig& cfg) {
    model.validate();
    mesh.validate();
    StepStats stats;
    const Positions x0 = mesh.positions;
    Positions x = x0;

    for (int k = 0; k < model.newton_iters; ++k) {
        ProximitySet set = proximity_search(x, mesh, cfg.d_max);
        GradientHessian gh = gradient_and_hessian(model, mesh, x);
        add_repulsion(model, set, x, gh);
        NewtonResult nt = newton_target(model, mesh, x, gh);
        Positions y = std::move(nt.y);
        if (model.mu > 0.0) y = friction_filter(model, mesh, x, y, set);
        ResolveResult rr = resolve(x, y, mesh, cfg);
        x = std::move(rr.x);
        stats.resolves.push_back(std::move(rr.stats));
    }

    for (int v = 0; v < mesh.num_vertices(); ++v)
        mesh.velocities[v] = mesh.is_static(v) ? Vec3::Zero() : Vec3((x[v] - x0[v]) / model.dt);
    mesh.positions = std::move(x);
    return stats;
}

}  // namespace twoway
