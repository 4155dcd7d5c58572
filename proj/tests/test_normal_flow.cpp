#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "twoway/normal_flow.hpp"
#include "twoway/obj_io.hpp"
#include "twoway/testkit/ccd.hpp"
#include "twoway/testkit/fixtures.hpp"

using namespace twoway;
using namespace twoway::testkit;

TEST_CASE("obj: write/read round trip holds 9 significant digits") {
    MeshState m = make_icosphere(1, 0.0123456789, Vec3(0.1, -0.2, 0.3));
    m.strand_edges.push_back({0, 5});
    m.finalize();
    const std::string path = (std::filesystem::temp_directory_path() / "roundtrip.obj").string();
    write_obj(path, m);
    MeshState back = read_obj(path);

    REQUIRE(back.num_vertices() == m.num_vertices());
    REQUIRE(back.triangles == m.triangles);
    REQUIRE(back.strand_edges == m.strand_edges);
    for (int v = 0; v < m.num_vertices(); ++v)
        for (int axis = 0; axis < 3; ++axis) {
            const double c = m.positions[v][axis];
            // half an ulp at 9 significant digits
            const double ulp9 = std::pow(10.0, std::floor(std::log10(std::max(std::abs(c), 1e-30))) - 8);
            CHECK(std::abs(back.positions[v][axis] - c) <= 0.5 * ulp9 * 1.0000001);
        }
    std::filesystem::remove(path);
}

TEST_CASE("obj: malformed input reports the line") {
    const std::string path = (std::filesystem::temp_directory_path() / "bad.obj").string();
    {
        std::FILE* f = std::fopen(path.c_str(), "w");
        std::fputs("v 0 0 0\nv 1 0 0\nf 1 2 9\n", f);
        std::fclose(f);
    }
    CHECK_THROWS_WITH_AS(read_obj(path), doctest::Contains("line 3"), std::runtime_error);
    std::filesystem::remove(path);
}

TEST_CASE("manifold check accepts closed meshes and rejects open ones") {
    MeshState sphere = make_icosphere(1, 0.02, Vec3::Zero());
    CHECK_NOTHROW(require_closed_manifold(sphere));
    MeshState db = make_dumbbell(0.05, 0.02, 0.008, 10, 13);
    CHECK_NOTHROW(require_closed_manifold(db));

    MeshState patch = make_grid_patch(3, 3, 0.02, 0.02, Vec3::Zero(), Vec3::UnitX(), Vec3::UnitY());
    CHECK_THROWS_AS(require_closed_manifold(patch), std::invalid_argument);
}

TEST_CASE("sphere normals are radial and the offset shrinks the radius by beta") {
    const double r = 0.03;
    MeshState sphere = make_icosphere(2, r, Vec3::Zero());
    const Positions normals = area_weighted_normals(sphere, sphere.positions);
    for (int v = 0; v < sphere.num_vertices(); ++v) {
        const Vec3 radial = sphere.positions[v].normalized();
        CHECK(normals[v].dot(radial) > 0.999);
    }

    // before the smoothing correction, the offset shrinks the radius by beta
    const double beta = -5e-4;
    for (int v = 0; v < sphere.num_vertices(); ++v) {
        const Vec3 offset = sphere.positions[v] + beta * normals[v];
        CHECK(offset.norm() == doctest::Approx(r + beta).epsilon(1e-4));
    }

    NormalFlowConfig nf;
    nf.beta = beta;
    const Positions y = normal_flow_target(sphere, sphere.positions, nf);
    double mean_r = 0.0;
    for (const Vec3& p : y) mean_r += p.norm();
    mean_r /= static_cast<double>(y.size());
    CHECK(mean_r < r + 0.5 * beta);  // smoothing only pulls further inward
}

TEST_CASE("beta = 0 smooths only and the state stays feasible") {
    MeshState sphere = make_icosphere(1, 0.03, Vec3::Zero());
    compute_lumped_masses(sphere, 0.1, 0.0);
    NormalFlowConfig nf;
    nf.beta = 0.0;
    ResolveConfig cfg;
    cfg.record_path = true;
    Positions x = sphere.positions;
    for (int it = 0; it < 3; ++it) {
        ResolveResult res = normal_flow_iteration(sphere, x, nf, cfg);
        CHECK(ccd_certify_path(res.stats.path, sphere).certain_count() == 0);
        x = std::move(res.x);
    }
}

TEST_CASE("dumbbell under negative flow keeps the neck apart") {
    MeshState db = make_dumbbell(0.04, 0.016, 0.006, 10, 13);
    compute_lumped_masses(db, 0.1, 0.0);
    NormalFlowConfig nf;
    nf.beta = -5e-4;
    ResolveConfig cfg;
    cfg.record_path = true;
    Positions x = db.positions;
    int violations = 0;
    for (int it = 0; it < 4; ++it) {
        ResolveResult res = normal_flow_iteration(db, x, nf, cfg);
        violations += ccd_certify_path(res.stats.path, db).certain_count();
        x = std::move(res.x);
    }
    CHECK(violations == 0);
}
