#pragma once

#include <string>

#include "twoway/advance.hpp"
#include "twoway/constraints.hpp"
#include "twoway/lcp.hpp"

namespace twoway {

enum class SolverKind : uint8_t { Pgs, Jacobi, Al20, Al100 };

struct ResolveConfig {
    int step_limit = 512;   // L; use 2048 for dt = 1/20 s
    double eps = 1e-4;
    double d_min = 2e-3;    // m
    double d_max = 4e-3;    // m
    double delta = 1e-3;    // m, constraint activation threshold
    double sigma = 1.1;     // edge violation ratio limit
    double gamma = 0.9;     // damping factor on movement

    SolverKind solver = SolverKind::Pgs;
    int sweeps = 1;
    double under_relax = 0.5;
    ConstraintFamily family = ConstraintFamily::Volume;
    bool edge_constraints = true;

    bool force_fresh_search = false;  // disable proximity reuse (testing)
    bool record_path = false;         // keep every intermediate state
    uint64_t color_seed = 0x5eed;

    /// Throws std::invalid_argument when a parameter is out of its domain.
    void validate() const;
};

struct ResolveStats {
    int steps = 0;
    int searches = 0;
    double final_residual = 0.0;
    std::vector<double> step_max_disp;
    double wall_ms = 0.0;
    bool converged = false;
    bool hit_step_limit = false;
    bool stagnated = false;         // AL baseline early-out
    bool start_in_contact = false;  // a pair at touching distance on entry
    bool step_law_violated = false; // 0.5*gamma*D displacement bound broken
    std::vector<Positions> path;    // x^(0) .. x^(final) when recorded

    static std::string csv_header();
    std::string csv_row() const;
};

struct ResolveResult {
    Positions x;
    ResolveStats stats;
};

/// Projects the target `y_target` onto an intersection-free state reachable
/// from `x_start` by a certified piecewise-linear path (the Alg.-1 loop of
/// interleaved backward and forward steps). `x_start` must be
/// intersection-free; the returned state is reached no matter whether the
/// final guidance target is feasible or not.
ResolveResult resolve(PositionsView x_start, PositionsView y_target, const MeshState& mesh,
                      const ResolveConfig& cfg);

/// Intersection-repair entry point: treats (x_free, y_penetrating) as the
/// state/target pair and runs resolve on it.
ResolveResult repair(PositionsView x_free, PositionsView y_penetrating, const MeshState& mesh,
                     const ResolveConfig& cfg);

}  // namespace twoway
