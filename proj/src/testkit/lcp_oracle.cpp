#include "twoway/testkit/lcp_oracle.hpp"

#include <stdexcept>

namespace twoway::testkit {

Eigen::VectorXd lcp_enumerate(const Eigen::MatrixXd& A, const Eigen::VectorXd& q) {
    const int n = static_cast<int>(q.size());
    if (n > 12) throw std::invalid_argument("lcp_enumerate: n must be <= 12");
    constexpr double tol = 1e-9;

    for (uint32_t mask = 0; mask < (1u << n); ++mask) {
        std::vector<int> act;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) act.push_back(i);

        Eigen::VectorXd lambda = Eigen::VectorXd::Zero(n);
        if (!act.empty()) {
            const int m = static_cast<int>(act.size());
            Eigen::MatrixXd Aaa(m, m);
            Eigen::VectorXd qa(m);
            for (int r = 0; r < m; ++r) {
                qa(r) = q(act[r]);
                for (int c = 0; c < m; ++c) Aaa(r, c) = A(act[r], act[c]);
            }
            Eigen::LDLT<Eigen::MatrixXd> ldlt(Aaa);
            if (ldlt.info() != Eigen::Success) continue;
            const Eigen::VectorXd la = ldlt.solve(-qa);
            if ((Aaa * la + qa).norm() > tol * (1.0 + qa.norm())) continue;  // singular block
            bool nonneg = true;
            for (int r = 0; r < m; ++r) nonneg &= la(r) >= -tol;
            if (!nonneg) continue;
            for (int r = 0; r < m; ++r) lambda(act[r]) = std::max(0.0, la(r));
        }

        const Eigen::VectorXd w = A * lambda + q;
        bool feasible = true;
        for (int i = 0; i < n; ++i) feasible &= w(i) >= -tol;
        if (feasible) return lambda;
    }
    throw std::runtime_error("lcp_enumerate: no complementarity-feasible active set");
}

}  // namespace twoway::testkit
