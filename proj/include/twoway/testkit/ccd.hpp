#pragma once

#include "twoway/mesh.hpp"

namespace twoway::testkit {

/// One linear motion segment to certify, plus the topology that defines the
/// pair universe (every non-adjacent VT and EE pair, not just a proximity set).
struct PathSegment {
    PositionsView start;
    PositionsView end;
    const MeshState* mesh = nullptr;
};

struct CcdViolation {
    Simplex a, b;
    double t = 0.0;
    bool certain = true;  // false: grazing/degenerate root, needs review
};

struct CcdReport {
    std::vector<CcdViolation> violations;
    int certain_count() const {
        int n = 0;
        for (const auto& v : violations) n += v.certain;
        return n;
    }
};

/// Trusted oracle: solves the VT/EE coplanarity cubics with double-double
/// coefficient formation and bisection on sign changes, then validates
/// inside-ness at each root. Conservative: near-misses come back tagged
/// uncertain rather than dropped. Never used by the production path.
CcdReport ccd_certify(const PathSegment& segment);

/// Convenience: certifies every consecutive pair of states.
CcdReport ccd_certify_path(const std::vector<Positions>& states, const MeshState& mesh);

}  // namespace twoway::testkit
