#pragma once

#include <Eigen/Dense>

namespace twoway::testkit {

/// Exhaustive active-set LCP solve for lambda >= 0 perp A lambda + q >= 0.
/// Tries all 2^n active sets (n <= 12, A symmetric PSD) and returns the first
/// complementarity-feasible solution. Throws std::runtime_error when no
/// active set is feasible.
Eigen::VectorXd lcp_enumerate(const Eigen::MatrixXd& A, const Eigen::VectorXd& q);

}  // namespace twoway::testkit
