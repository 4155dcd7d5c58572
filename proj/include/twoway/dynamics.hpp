#pragma once

#include <Eigen/Sparse>

#include "twoway/resolve.hpp"

namespace twoway {

/// Implicit-Euler incremental potential: inertia + mass-spring elasticity +
/// optional flat-rest quadratic bending + gravity, with a quadratic proximity
/// repulsion and a Coulomb velocity filter bolted on at step level.
struct EnergyModel {
    double spring_stiffness = 50.0;    // N/m, uniform per edge
    double bending_stiffness = 0.0;    // N/m, uniform per hinge
    Vec3 gravity = Vec3(0, 0, -9.81);  // m/s^2
    double repulsion_stiffness = 1e3;  // N/m
    double repulsion_radius = 1e-3;    // m (activation distance)
    double dt = 0.01;                  // s
    int newton_iters = 1;              // K, fixed per step
    double mu = 0.0;                   // Coulomb friction coefficient
    double pcg_tol = 1e-6;             // relative residual target
    int pcg_max_iters = 400;

    // rest data, built by prepare()
    std::vector<double> rest_lengths;
    struct Hinge {
        std::array<int, 4> v;      // edge (0,1), flaps (2,3)
        std::array<double, 4> k;   // unit-norm bending coefficient vector
    };
    std::vector<Hinge> hinges;

    /// Captures rest lengths and bending stencils from the mesh's current
    /// positions. Call once before stepping.
    void prepare(const MeshState& mesh);

    void validate() const;
};

struct GradientHessian {
    Eigen::VectorXd gradient;                  // 3N
    std::vector<Eigen::Triplet<double>> trips; // PSD-projected element blocks
    Eigen::SparseMatrix<double> assemble(int n) const;
};

/// Incremental-potential gradient and PSD-projected Hessian at x; rows and
/// columns of static vertices are masked to identity.
GradientHessian gradient_and_hessian(const EnergyModel& model, const MeshState& mesh,
                                     PositionsView x);

/// The scalar incremental potential the gradient differentiates (test hook).
double incremental_energy(const EnergyModel& model, const MeshState& mesh, PositionsView x);

/// Adds the quadratic repulsion acting on pairs closer than the activation
/// radius (Gauss-Newton Hessian blocks, equal-and-opposite forces).
void add_repulsion(const EnergyModel& model, const ProximitySet& set, PositionsView x,
                   GradientHessian& gh);

struct NewtonResult {
    Positions y;
    bool pcg_converged = true;
    int pcg_iterations = 0;
};

/// One Newton step y = x - G^-1 b solved by conjugate gradients with a 3x3
/// block-Jacobi preconditioner (relative residual 1e-6, cap 400 iterations;
/// returns the best iterate with a flag when the cap is hit).
NewtonResult newton_target(const EnergyModel& model, const MeshState& mesh, PositionsView x,
                           const GradientHessian& gh);

/// Bridson-style velocity filter: per contact pair, a normal impulse
/// proportional to the target-state penetration depth and a tangential
/// impulse clamped by mu times the normal one. Returns the filtered target.
Positions friction_filter(const EnergyModel& model, const MeshState& mesh, PositionsView x,
                          PositionsView y_target, const ProximitySet& set);

struct StepStats {
    std::vector<ResolveStats> resolves;
    int total_resolve_steps() const {
        int n = 0;
        for (const auto& r : resolves) n += r.steps;
        return n;
    }
    int total_searches() const {
        int n = 0;
        for (const auto& r : resolves) n += r.searches;
        return n;
    }
};

/// One simulation step: K times (newton target + repulsion + friction filter,
/// then resolve), followed by the velocity update v = (x^{t+1} - x^t) / dt.
StepStats step(const EnergyModel& model, MeshState& mesh, const ResolveConfig& cfg);

}  // namespace twoway
