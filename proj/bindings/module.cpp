#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "twoway/distance.hpp"
#include "twoway/normal_flow.hpp"
#include "twoway/obj_io.hpp"
#include "twoway/resolve.hpp"
#include "twoway/testkit/ccd.hpp"

namespace py = pybind11;
using namespace twoway;

namespace {

using MatX3 = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using MatX3i = Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor>;
using MatX2i = Eigen::Matrix<int, Eigen::Dynamic, 2, Eigen::RowMajor>;

Positions to_positions(const MatX3& m) {
    Positions out(m.rows());
    for (Eigen::Index i = 0; i < m.rows(); ++i) out[i] = m.row(i).transpose();
    return out;
}

MatX3 from_positions(PositionsView x) {
    MatX3 out(static_cast<Eigen::Index>(x.size()), 3);
    for (size_t i = 0; i < x.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x[i].transpose();
    return out;
}

MeshState make_mesh(const MatX3& positions, const MatX3i& triangles, const MatX2i& strand_edges,
                    const Eigen::VectorXd& inv_mass) {
    MeshState mesh;
    mesh.positions = to_positions(positions);
    for (Eigen::Index t = 0; t < triangles.rows(); ++t)
        mesh.triangles.push_back({triangles(t, 0), triangles(t, 1), triangles(t, 2)});
    for (Eigen::Index e = 0; e < strand_edges.rows(); ++e)
        mesh.strand_edges.push_back({strand_edges(e, 0), strand_edges(e, 1)});
    if (inv_mass.size() > 0) {
        if (inv_mass.size() != positions.rows())
            throw std::invalid_argument("inv_mass size must match positions");
        mesh.inv_mass.assign(inv_mass.data(), inv_mass.data() + inv_mass.size());
    }
    mesh.finalize();
    mesh.validate();
    return mesh;
}

ResolveConfig config_from_kwargs(const py::kwargs& kw) {
    ResolveConfig cfg;
    for (const auto& item : kw) {
        const std::string key = py::cast<std::string>(item.first);
        if (key == "step_limit") cfg.step_limit = py::cast<int>(item.second);
        else if (key == "eps") cfg.eps = py::cast<double>(item.second);
        else if (key == "d_min") cfg.d_min = py::cast<double>(item.second);
        else if (key == "d_max") cfg.d_max = py::cast<double>(item.second);
        else if (key == "delta") cfg.delta = py::cast<double>(item.second);
        else if (key == "sigma") cfg.sigma = py::cast<double>(item.second);
        else if (key == "gamma") cfg.gamma = py::cast<double>(item.second);
        else if (key == "sweeps") cfg.sweeps = py::cast<int>(item.second);
        else if (key == "edge_constraints") cfg.edge_constraints = py::cast<bool>(item.second);
        else if (key == "record_path") cfg.record_path = py::cast<bool>(item.second);
        else if (key == "color_seed") cfg.color_seed = py::cast<uint64_t>(item.second);
        else if (key == "solver") {
            const std::string s = py::cast<std::string>(item.second);
            if (s == "pgs") cfg.solver = SolverKind::Pgs;
            else if (s == "jacobi") cfg.solver = SolverKind::Jacobi;
            else if (s == "al20") cfg.solver = SolverKind::Al20;
            else if (s == "al100") cfg.solver = SolverKind::Al100;
            else throw std::invalid_argument("unknown solver '" + s + "'");
        } else if (key == "constraint_family") {
            const std::string s = py::cast<std::string>(item.second);
            if (s == "volume") cfg.family = ConstraintFamily::Volume;
            else if (s == "gap") cfg.family = ConstraintFamily::Gap;
            else throw std::invalid_argument("unknown constraint_family '" + s + "'");
        } else {
            throw std::invalid_argument("unknown config key '" + key + "'");
        }
    }
    return cfg;
}

py::dict stats_to_dict(const ResolveStats& st) {
    py::dict d;
    d["steps"] = st.steps;
    d["searches"] = st.searches;
    d["final_residual"] = st.final_residual;
    d["converged"] = st.converged;
    d["hit_step_limit"] = st.hit_step_limit;
    d["stagnated"] = st.stagnated;
    d["wall_ms"] = st.wall_ms;
    py::list path;
    for (const auto& p : st.path) path.append(from_positions(p));
    d["path"] = path;
    return d;
}

}  // namespace

PYBIND11_MODULE(_twoway, m) {
    m.doc() = "two-way continuous collision handling: resolve/repair a penetrating "
              "target onto an intersection-free state along a certified path";

    m.def(
        "resolve",
        [](const MatX3& x, const MatX3& y, const MatX3i& triangles, const MatX2i& strand_edges,
           const Eigen::VectorXd& inv_mass, const py::kwargs& kw) {
            MeshState mesh = make_mesh(x, triangles, strand_edges, inv_mass);
            const ResolveConfig cfg = config_from_kwargs(kw);
            const ResolveResult res = resolve(to_positions(x), to_positions(y), mesh, cfg);
            return py::make_tuple(from_positions(res.x), stats_to_dict(res.stats));
        },
        py::arg("x"), py::arg("y"), py::arg("triangles"),
        py::arg("strand_edges") = MatX2i(0, 2), py::arg("inv_mass") = Eigen::VectorXd(),
        "Project target y onto an intersection-free state reachable from x.\n"
        "Keyword arguments mirror the solver configuration (eps, delta, d_min,\n"
        "d_max, sigma, gamma, step_limit, solver, sweeps, constraint_family,\n"
        "edge_constraints, record_path, color_seed).");

    m.def(
        "repair",
        [](const MatX3& x, const MatX3& y, const MatX3i& triangles, const MatX2i& strand_edges,
           const Eigen::VectorXd& inv_mass, const py::kwargs& kw) {
            MeshState mesh = make_mesh(x, triangles, strand_edges, inv_mass);
            const ResolveConfig cfg = config_from_kwargs(kw);
            const ResolveResult res = repair(to_positions(x), to_positions(y), mesh, cfg);
            return py::make_tuple(from_positions(res.x), stats_to_dict(res.stats));
        },
        py::arg("x"), py::arg("y"), py::arg("triangles"),
        py::arg("strand_edges") = MatX2i(0, 2), py::arg("inv_mass") = Eigen::VectorXd(),
        "Intersection-repair entry point (x must be intersection-free).");

    m.def(
        "normal_flow_target",
        [](const MatX3& x, const MatX3i& triangles, double beta, double alpha) {
            MeshState mesh = make_mesh(x, triangles, MatX2i(0, 2), Eigen::VectorXd());
            require_closed_manifold(mesh);
            NormalFlowConfig nf;
            nf.beta = beta;
            nf.alpha_smooth = alpha;
            return from_positions(normal_flow_target(mesh, mesh.positions, nf));
        },
        py::arg("x"), py::arg("triangles"), py::arg("beta") = 5e-4, py::arg("alpha") = 0.5,
        "Offset along area-weighted normals plus three cotangent-Jacobi smoothing passes.");

    m.def(
        "certify_segment",
        [](const MatX3& x0, const MatX3& x1, const MatX3i& triangles, const MatX2i& strand_edges) {
            MeshState mesh = make_mesh(x0, triangles, strand_edges, Eigen::VectorXd());
            const Positions a = to_positions(x0), b = to_positions(x1);
            const testkit::PathSegment seg{a, b, &mesh};
            const testkit::CcdReport rep = testkit::ccd_certify(seg);
            py::dict d;
            d["certain"] = rep.certain_count();
            d["uncertain"] = static_cast<int>(rep.violations.size()) - rep.certain_count();
            return d;
        },
        py::arg("x0"), py::arg("x1"), py::arg("triangles"), py::arg("strand_edges") = MatX2i(0, 2),
        "CCD-oracle check of the linear motion between two states.");

    m.def(
        "vertex_triangle_closest",
        [](const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
            auto r = vertex_triangle_closest(p, a, b, c);
            if (!r) throw std::invalid_argument("degenerate triangle");
            py::dict d;
            d["distance"] = r->distance;
            d["weights"] = py::make_tuple(r->weights_b[0], r->weights_b[1], r->weights_b[2]);
            return d;
        },
        py::arg("p"), py::arg("a"), py::arg("b"), py::arg("c"));

    m.def(
        "edge_edge_closest",
        [](const Vec3& p1, const Vec3& p2, const Vec3& q1, const Vec3& q2) {
            auto r = edge_edge_closest(p1, p2, q1, q2);
            if (!r) throw std::invalid_argument("degenerate segment");
            py::dict d;
            d["distance"] = r->distance;
            d["s"] = r->weights_a[1];
            d["t"] = r->weights_b[1];
            return d;
        },
        py::arg("p1"), py::arg("p2"), py::arg("q1"), py::arg("q2"));
}
