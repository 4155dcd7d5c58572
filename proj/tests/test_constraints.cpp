#include <doctest.h>

#include <random>
#include <set>

#include "twoway/constraints.hpp"

using namespace twoway;

namespace {

constexpr double kDelta = 1e-3;

ProximityPair make_pair(const Simplex& a, int ia, const Simplex& b, int ib, PositionsView x) {
    ProximityPair p;
    p.a = a;
    p.b = b;
    p.index_a = ia;
    p.index_b = ib;
    auto r = simplex_pair_closest(a, b, x);
    REQUIRE(r.has_value());
    p.closest = *r;
    return p;
}

// vertex above the unit-ish triangle at the given height (interior projection)
Positions vt_config(double height) {
    return {Vec3(0.03, 0.02, height), Vec3(0, 0, 0), Vec3(0.1, 0, 0), Vec3(0, 0.1, 0)};
}

double fd_check_max_rel_error(const Constraint& c, Positions x) {
    const double h = 1e-6;
    double max_rel = 0.0;
    for (int m = 0; m < c.nverts; ++m) {
        for (int axis = 0; axis < 3; ++axis) {
            Positions xp = x, xm = x;
            xp[c.verts[m]][axis] += h;
            xm[c.verts[m]][axis] -= h;
            const double fd = (constraint_value_at(c, xp) - constraint_value_at(c, xm)) / (2 * h);
            const double an = c.jac[m][axis];
            const double scale = std::max({std::abs(fd), std::abs(an), 1e-6});
            max_rel = std::max(max_rel, std::abs(fd - an) / scale);
        }
    }
    return max_rel;
}

}  // namespace

TEST_CASE("VT constraint: value tracks the separation ratio") {
    SUBCASE("at the activation gap the reference coincides, c = 0") {
        Positions x = vt_config(kDelta);
        auto p = make_pair(Simplex::vertex(0), 0, Simplex::triangle(1, 2, 3), 0, x);
        Constraint c = build_vt_constraint(p, x, kDelta);
        CHECK(c.flavor == Constraint::Flavor::VolumeRatio);
        CHECK(std::abs(c.value) < 1e-10);
    }
    SUBCASE("at twice the gap the constraint is satisfied") {
        Positions x = vt_config(2 * kDelta);
        auto p = make_pair(Simplex::vertex(0), 0, Simplex::triangle(1, 2, 3), 0, x);
        Constraint c = build_vt_constraint(p, x, kDelta);
        CHECK(c.value > 0.0);
        CHECK(c.value == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("through the plane past the reference, c < 0") {
        Positions x = vt_config(0.5 * kDelta);
        auto p = make_pair(Simplex::vertex(0), 0, Simplex::triangle(1, 2, 3), 0, x);
        Constraint c = build_vt_constraint(p, x, kDelta);
        Positions crossed = x;
        crossed[0][2] = -2.0 * kDelta;  // push the vertex through
        CHECK(constraint_value_at(c, crossed) < 0.0);
        CHECK(constraint_value_at(c, x) == doctest::Approx(c.value));
    }
}

TEST_CASE("VV constraint values") {
    auto value_at_distance = [](double dist) {
        Positions x = {Vec3(0, 0, 0), Vec3(dist, 0, 0)};
        auto p = make_pair(Simplex::vertex(0), 0, Simplex::vertex(1), 1, x);
        return build_vv_constraint(p, x, kDelta).value;
    };
    CHECK(value_at_distance(kDelta) == doctest::Approx(0.0));
    CHECK(value_at_distance(0.5e-3) == doctest::Approx(-0.5));
    CHECK(value_at_distance(2e-3) == doctest::Approx(1.0));
}

TEST_CASE("EE constraint: reference coincidence and crossing sign") {
    auto ee_positions = [](double gap) {
        return Positions{Vec3(-0.05, 0, 0), Vec3(0.05, 0, 0), Vec3(0, -0.05, gap),
                         Vec3(0, 0.05, gap)};
    };
    SUBCASE("at the gap the reference coincides") {
        Positions x = ee_positions(kDelta);
        auto p = make_pair(Simplex::edge(0, 1), 0, Simplex::edge(2, 3), 1, x);
        Constraint c = build_ee_constraint(p, x, kDelta);
        CHECK(c.flavor == Constraint::Flavor::VolumeRatio);
        CHECK(std::abs(c.value) < 1e-10);
    }
    SUBCASE("at half the gap the constraint is active") {
        Positions x = ee_positions(0.5 * kDelta);
        auto p = make_pair(Simplex::edge(0, 1), 0, Simplex::edge(2, 3), 1, x);
        Constraint c = build_ee_constraint(p, x, kDelta);
        CHECK(c.value < 0.0);
        CHECK(c.value == doctest::Approx(-0.5).epsilon(1e-9));
    }
    SUBCASE("sign is positive at the assembly state, negative across") {
        Positions x = ee_positions(0.3 * kDelta);
        auto p = make_pair(Simplex::edge(0, 1), 0, Simplex::edge(2, 3), 1, x);
        Constraint c = build_ee_constraint(p, x, kDelta);
        CHECK(c.value + 1.0 > 0.0);  // volume ratio positive at x^(l)
        Positions crossed = ee_positions(-0.5 * kDelta);
        CHECK(constraint_value_at(c, crossed) < 0.0);
    }
}

TEST_CASE("edge-length constraint values") {
    MeshState m;
    m.positions = {Vec3(0, 0, 0), Vec3(0.01, 0, 0)};
    m.edges = {{0, 1}};
    m.finalize();
    const double sigma = 1.1;

    SUBCASE("current equals target: inactive slack sigma - 1") {
        auto rows = build_edge_length_constraints(m, m.positions, {0.01}, sigma);
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].value == doctest::Approx(0.1));
    }
    SUBCASE("stretched 20% beyond target: active") {
        Positions x = {Vec3(0, 0, 0), Vec3(0.012, 0, 0)};
        auto rows = build_edge_length_constraints(m, x, {0.01}, sigma);
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].value == doctest::Approx(-0.1));
    }
    SUBCASE("zero current length: compression unconstrained") {
        Positions x = {Vec3(0, 0, 0), Vec3(0, 0, 0)};
        auto rows = build_edge_length_constraints(m, x, {0.01}, sigma);
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].value == doctest::Approx(1.1));
    }
    SUBCASE("zero-length target edge is skipped") {
        auto rows = build_edge_length_constraints(m, m.positions, {0.0}, sigma);
        CHECK(rows.empty());
    }
}

TEST_CASE("linearize_all: activation window and target violation") {
    MeshState m;
    m.positions = {Vec3(0.03, 0.02, 0.5e-3), Vec3(0, 0, 0), Vec3(0.1, 0, 0), Vec3(0, 0.1, 0)};
    m.triangles = {{1, 2, 3}};
    m.finalize();

    AssemblyOptions opts;
    opts.delta = kDelta;

    SUBCASE("no pair within delta: contact-free with inactive edge rows") {
        Positions far = m.positions;
        far[0][2] = 5e-3;
        std::vector<double> targets(m.edges.size());
        for (size_t e = 0; e < m.edges.size(); ++e)
            targets[e] = (far[m.edges[e][0]] - far[m.edges[e][1]]).norm();
        ProximitySet set = proximity_search(far, m, 4e-3);
        auto rows = linearize_all(set, far, m, targets, opts);
        CHECK(!rows.empty());
        for (const auto& c : rows) {
            CHECK(c.kind == ConstraintKind::EdgeLength);
            CHECK(c.value >= 0.0);
        }
    }
    SUBCASE("one VT pair at half a millimetre: exactly one contact row") {
        ProximitySet set = proximity_search(m.positions, m, 4e-3);
        opts.edge_constraints = false;
        auto rows = linearize_all(set, m.positions, m, {}, opts);
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].kind == ConstraintKind::ContactVT);
        // a penetrating target violates the linearized row: c + J (y - x) < 0
        Positions y = m.positions;
        y[0][2] = -1e-3;
        double q = rows[0].value;
        for (int k = 0; k < rows[0].nverts; ++k)
            q += rows[0].jac[k].dot(y[rows[0].verts[k]] - m.positions[rows[0].verts[k]]);
        CHECK(q < 0.0);
    }
}

TEST_CASE("assembly-state feasibility: volume ratio stays nonnegative") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-0.02, 0.02);
    AssemblyOptions opts;
    opts.delta = kDelta;
    opts.edge_constraints = false;
    int built = 0;
    while (built < 200) {
        MeshState m;
        m.positions.resize(7);
        for (Vec3& p : m.positions) p = Vec3(u(rng), u(rng), u(rng));
        // squash into a thin slab so pairs actually come close
        for (Vec3& p : m.positions) p[2] *= 0.05;
        m.triangles = {{0, 1, 2}};
        m.strand_edges = {{3, 4}, {5, 6}};
        m.finalize();
        ProximitySet set = proximity_search(m.positions, m, 4e-3);
        auto rows = linearize_all(set, m.positions, m, {}, opts);
        for (const auto& c : rows) {
            CHECK(c.value + 1.0 >= -1e-9);
            ++built;
        }
    }
}

TEST_CASE("jacobians match central finite differences") {
    std::mt19937_64 rng(31337);
    std::uniform_real_distribution<double> u(-0.02, 0.02);
    AssemblyOptions vol, gap;
    vol.delta = gap.delta = kDelta;
    vol.edge_constraints = gap.edge_constraints = true;
    gap.family = ConstraintFamily::Gap;

    int checked = 0;
    while (checked < 100) {
        MeshState m;
        m.positions.resize(10);
        for (Vec3& p : m.positions) p = Vec3(u(rng), u(rng), 0.05 * u(rng));
        m.triangles = {{0, 1, 2}, {3, 4, 5}};
        m.strand_edges = {{6, 7}};
        m.finalize();
        std::vector<double> targets(m.edges.size());
        for (size_t e = 0; e < m.edges.size(); ++e)
            targets[e] =
                (m.positions[m.edges[e][0]] - m.positions[m.edges[e][1]]).norm() * 0.95 + 1e-4;

        ProximitySet set = proximity_search(m.positions, m, 4e-3);
        for (const AssemblyOptions& opts : {vol, gap}) {
            auto rows = linearize_all(set, m.positions, m, targets, opts);
            for (const auto& c : rows) {
                // rows built from near-touching pairs sit inside the FD step;
                // central differences cannot probe those
                if (c.pair_index >= 0 &&
                    set.pairs[c.pair_index].closest.distance < 1e-5)
                    continue;
                CHECK(fd_check_max_rel_error(c, m.positions) < 1e-4);
                ++checked;
            }
        }
    }
}

TEST_CASE("coloring: chromatic structure of simple conflict graphs") {
    std::vector<double> inv_mass(12, 1.0);

    auto edge_row = [](int i, int j) {
        Constraint c;
        c.kind = ConstraintKind::EdgeLength;
        c.nverts = 2;
        c.verts = {i, j, -1, -1};
        return c;
    };

    SUBCASE("disjoint rows take one color") {
        std::vector<Constraint> rows = {edge_row(0, 1), edge_row(2, 3), edge_row(4, 5)};
        CHECK(color_constraints(rows, inv_mass, 1) == 1);
    }
    SUBCASE("a chain takes two colors") {
        std::vector<Constraint> rows;
        for (int i = 0; i + 1 < 8; ++i) rows.push_back(edge_row(i, i + 1));
        CHECK(color_constraints(rows, inv_mass, 1) == 2);
    }
    SUBCASE("a star on one vertex takes as many colors as rows") {
        std::vector<Constraint> rows;
        for (int k = 1; k <= 5; ++k) rows.push_back(edge_row(0, k));
        CHECK(color_constraints(rows, inv_mass, 1) == 5);
    }
    SUBCASE("rows sharing only a static vertex do not conflict") {
        std::vector<double> masses = {0.0, 1.0, 1.0};
        std::vector<Constraint> rows = {edge_row(0, 1), edge_row(0, 2)};
        CHECK(color_constraints(rows, masses, 1) == 1);
    }
}

TEST_CASE("coloring validity: dynamic vertices unique per color") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-0.02, 0.02);
    MeshState m;
    m.positions.resize(12);
    for (Vec3& p : m.positions) p = Vec3(u(rng), u(rng), 0.02 * u(rng));
    m.triangles = {{0, 1, 2}, {3, 4, 5}, {6, 7, 8}};
    m.finalize();
    std::vector<double> targets(m.edges.size(), 0.01);

    AssemblyOptions opts;
    ProximitySet set = proximity_search(m.positions, m, 4e-3);
    auto rows = linearize_all(set, m.positions, m, targets, opts);
    const int ncolors = color_constraints(rows, m.inv_mass, 1234);
    REQUIRE(ncolors >= 1);
    for (int col = 0; col < ncolors; ++col) {
        std::set<int> touched;
        for (const auto& c : rows) {
            if (c.color != col) continue;
            for (int k = 0; k < c.nverts; ++k) {
                if (m.inv_mass[c.verts[k]] == 0.0) continue;
                CHECK(touched.insert(c.verts[k]).second);
            }
        }
    }
}
