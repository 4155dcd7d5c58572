#include "twoway/resolve.hpp"

#include <cfloat>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <unordered_map>

namespace twoway {

void ResolveConfig::validate() const {
    if (!(d_min > 0.0) || !(d_min <= d_max))
        throw std::invalid_argument("resolve: need 0 < d_min <= d_max");
    if (!(delta > 0.0) || !(delta <= d_min))
        throw std::invalid_argument("resolve: need 0 < delta <= d_min");
    if (!(gamma > 0.0) || !(gamma < 1.0)) throw std::invalid_argument("resolve: need 0 < gamma < 1");
    if (!(eps > 0.0)) throw std::invalid_argument("resolve: need eps > 0");
    if (step_limit < 1) throw std::invalid_argument("resolve: need step_limit >= 1");
    if (sweeps < 1) throw std::invalid_argument("resolve: need sweeps >= 1");
}

std::string ResolveStats::csv_header() {
    return "steps,searches,residual,max_disp,ms";
}

std::string ResolveStats::csv_row() const {
    double md = 0.0;
    for (double d : step_max_disp) md = std::max(md, d);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%d,%d,%.9g,%.9g,%.3f", steps, searches, final_residual, md,
                  wall_ms);
    return buf;
}

ResolveResult resolve(PositionsView x_start, PositionsView y_target, const MeshState& mesh,
                      const ResolveConfig& cfg) {
    cfg.validate();
    const size_t n = mesh.positions.size();
    if (x_start.size() != n || y_target.size() != n)
        throw std::invalid_argument("resolve: position arrays do not match mesh");
    if (!all_finite(x_start) || !all_finite(y_target))
        throw std::invalid_argument("resolve: non-finite input positions");

    const auto t0 = std::chrono::steady_clock::now();

    // static vertices never move: their target is their current position
    Positions y_k1(y_target.begin(), y_target.end());
    for (size_t v = 0; v < n; ++v)
        if (mesh.inv_mass[v] == 0.0) y_k1[v] = x_start[v];

    // edge-length denominators are frozen at y^{[k+1]} for the whole call
    std::vector<double> edge_targets(mesh.edges.size());
    for (size_t e = 0; e < mesh.edges.size(); ++e)
        edge_targets[e] = (y_k1[mesh.edges[e][0]] - y_k1[mesh.edges[e][1]]).norm();

    AssemblyOptions opts;
    opts.delta = cfg.delta;
    opts.sigma = cfg.sigma;
    opts.family = cfg.family;
    opts.edge_constraints = cfg.edge_constraints;

    ResolveResult out;
    ResolveStats& st = out.stats;
    AdvanceState state;
    state.reset(x_start);
    if (cfg.record_path) st.path.push_back(state.x);

    ProximitySet set;  // bound starts at 0, forcing a search on the first step
    std::unordered_map<uint64_t, double> contact_lambda;
    std::vector<double> edge_lambda(mesh.edges.size(), 0.0);

    double prev_residual = 1.0;
    for (int l = 0; l < cfg.step_limit; ++l) {
        if (cfg.force_fresh_search || set.needs_refresh(cfg.d_min)) {
            set = proximity_search(state.x, mesh, cfg.d_max);
            ++st.searches;
            if (st.searches == 1) {
                for (const ProximityPair& p : set.pairs)
                    if (p.closest.distance < 1e-10) st.start_in_contact = true;
            }
        }

        // backward step: assemble at x^(l), solve the LCP inexactly, recover y
        std::vector<Constraint> rows = linearize_all(set, state.x, mesh, edge_targets, opts);
        for (Constraint& c : rows) {
            if (c.kind == ConstraintKind::EdgeLength) {
                c.lambda = edge_lambda[c.edge_index];
            } else {
                auto it = contact_lambda.find(c.pair_key);
                c.lambda = it == contact_lambda.end() ? 0.0 : it->second;
            }
        }
        const int ncolors = color_constraints(rows, mesh.inv_mass, cfg.color_seed);
        LcpSystem sys = assemble_lcp(rows, state.x, y_k1, mesh.inv_mass, ncolors);
        switch (cfg.solver) {
            case SolverKind::Pgs: pgs_sweeps(sys, cfg.sweeps); break;
            case SolverKind::Jacobi: projected_jacobi_sweeps(sys, cfg.sweeps, cfg.under_relax); break;
            case SolverKind::Al20: al_gradient_descent(sys, 20); break;
            case SolverKind::Al100: al_gradient_descent(sys, 100); break;
        }
        const Positions y = recover_target(sys, y_k1);

        // multipliers persist per pair identity while the pair stays in the
        // proximity active set; leaving it resets them to zero
        for (const Constraint& c : rows) {
            if (c.kind == ConstraintKind::EdgeLength)
                edge_lambda[c.edge_index] = c.lambda;
            else
                contact_lambda[c.pair_key] = c.lambda;
        }

        // forward step
        advance(state, y, set, cfg.gamma, mesh.inv_mass);
        if (state.last_max_disp > 0.5 * cfg.gamma * set.bound) st.step_law_violated = true;
        st.step_max_disp.push_back(state.last_max_disp);
        st.steps = l + 1;
        if (cfg.record_path) st.path.push_back(state.x);

        refresh_distances(set, state.x);
        shrink_bound(set, state.last_max_disp);
        for (const ProximityPair& p : set.pairs)
            if (!p.active) contact_lambda.erase(p.key());

        const double residual = state.max_remainder();
        st.final_residual = residual;
        if (residual < cfg.eps) {
            st.converged = true;
            break;
        }
        const bool al = cfg.solver == SolverKind::Al20 || cfg.solver == SolverKind::Al100;
        if (al && l > 0 && prev_residual - residual < FLT_EPSILON) {
            st.stagnated = true;
            break;
        }
        prev_residual = residual;
    }
    st.hit_step_limit = !st.converged && !st.stagnated;

    out.x = std::move(state.x);
    st.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                     .count();
    return out;
}

ResolveResult repair(PositionsView x_free, PositionsView y_penetrating, const MeshState& mesh,
                     const ResolveConfig& cfg) {
    return resolve(x_free, y_penetrating, mesh, cfg);
}

}  // namespace twoway
