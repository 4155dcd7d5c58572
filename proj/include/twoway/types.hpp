#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

namespace twoway {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

using Positions = std::vector<Vec3>;
using PositionsView = std::span<const Vec3>;

inline bool is_finite(const Vec3& v) { return v.allFinite(); }

inline bool all_finite(PositionsView xs) {
    for (const Vec3& x : xs)
        if (!x.allFinite()) return false;
    return true;
}

}  // namespace twoway
