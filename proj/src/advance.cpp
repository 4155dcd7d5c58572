#include "twoway/advance.hpp"

#include <algorithm>
#include <cmath>

namespace twoway {

void advance(AdvanceState& state, PositionsView y_target, const ProximitySet& set, double gamma,
             std::span<const double> inv_mass) {
    const size_t n = state.x.size();
    double max_disp = 0.0;
    for (size_t i = 0; i < n; ++i) {
        if (inv_mass[i] == 0.0) {  // static: position untouched, remainder done
            state.r[i] = 0.0;
            continue;
        }
        const Vec3 d = y_target[i] - state.x[i];
        const double dn = d.norm();
        if (dn == 0.0) {
            state.r[i] = 0.0;
            continue;
        }
        const double limit = 0.5 * gamma * per_vertex_bound(set, static_cast<int>(i));
        double alpha = std::min(limit / dn, 1.0);
        Vec3 disp = alpha * d;
        if (alpha < 1.0) {
            const double dnorm = disp.norm();
            if (dnorm > limit) {  // last-ulp rounding guard, keeps the bound exact
                const double s = (limit / dnorm) * (1.0 - 1e-14);
                disp *= s;
                alpha *= s;
            }
        }
        state.x[i] += disp;
        state.r[i] *= (1.0 - alpha);
        max_disp = std::max(max_disp, disp.norm());
    }
    state.last_max_disp = max_disp;
}

bool termination_reached(const AdvanceState& state, double eps) {
    return state.max_remainder() < eps;
}

}  // namespace twoway
