#pragma once

#include "twoway/proximity.hpp"

namespace twoway {

/// Forward-step state: current positions and the per-vertex remainder r,
/// the running product of (1 - alpha) that measures the fraction of the
/// journey to the target still outstanding.
struct AdvanceState {
    Positions x;
    std::vector<double> r;
    double last_max_disp = 0.0;

    void reset(PositionsView start) {
        x.assign(start.begin(), start.end());
        r.assign(start.size(), 1.0);
        last_max_disp = 0.0;
    }
    double max_remainder() const {
        double m = 0.0;
        for (double v : r) m = std::max(m, v);
        return m;
    }
};

/// One asynchronous forward step towards `y_target`:
///   alpha_i = min(0.5 * gamma * D_i / |y_i - x_i|, 1),   D_i from the pair set
///   x_i += alpha_i (y_i - x_i),   r_i *= (1 - alpha_i).
/// Zero-displacement vertices take alpha = 1 so they cannot stall
/// termination; vertices with inv_mass = 0 never move. The pair set's
/// distances must be current at `state.x`. Guarantees
/// |x_i' - x_i| <= 0.5 * gamma * D_i exactly.
void advance(AdvanceState& state, PositionsView y_target, const ProximitySet& set, double gamma,
             std::span<const double> inv_mass);

/// ||r||_inf < eps
bool termination_reached(const AdvanceState& state, double eps);

}  // namespace twoway
