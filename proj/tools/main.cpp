#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "twoway/normal_flow.hpp"
#include "twoway/obj_io.hpp"
#include "twoway/scene.hpp"
#include "twoway/testkit/ccd.hpp"

namespace {

using namespace twoway;

uint64_t color_seed_from_env() {
    if (const char* s = std::getenv("TWOWAY_COLOR_SEED")) return std::strtoull(s, nullptr, 10);
    return 0x5eed;
}

int cmd_simulate(const std::string& config_path, bool certify) {
    SceneConfig scene = load_scene(config_path);
    scene.resolve.color_seed = color_seed_from_env();
    const SimulateOutcome out = run_simulation(scene, certify, std::cout);
    if (certify && out.certain_violations > 0) {
        std::cerr << "certification failed: " << out.certain_violations << " intersections\n";
        return 1;
    }
    return 0;
}

int cmd_repair(const std::string& x_path, const std::string& y_path, const std::string& out_path,
               double eps, int limit, bool certify) {
    MeshState mesh = read_obj(x_path);
    MeshState target = read_obj(y_path);
    if (mesh.triangles != target.triangles || mesh.strand_edges != target.strand_edges ||
        mesh.num_vertices() != target.num_vertices())
        throw std::runtime_error("repair: topology mismatch between inputs");
    for (const Vec3& p : target.positions)
        if (!p.allFinite()) throw std::runtime_error("repair: non-finite target positions");

    compute_lumped_masses(mesh, 0.1, 0.1);
    ResolveConfig cfg;
    cfg.eps = eps;
    cfg.step_limit = limit;
    cfg.record_path = certify;
    cfg.color_seed = color_seed_from_env();

    const ResolveResult res = repair(mesh.positions, target.positions, mesh, cfg);
    write_obj(out_path, mesh, res.x);

    std::cout << ResolveStats::csv_header() << "\n" << res.stats.csv_row() << "\n";
    if (res.stats.hit_step_limit) std::cout << "warning: step limit reached before convergence\n";
    if (certify) {
        const testkit::CcdReport rep = testkit::ccd_certify_path(res.stats.path, mesh);
        std::cout << "certification: " << rep.certain_count() << " intersections ("
                  << rep.violations.size() - rep.certain_count() << " uncertain)\n";
        if (rep.certain_count() > 0) return 1;
    }
    return 0;
}

int cmd_normalflow(const std::string& in_path, double beta, double alpha, int iters, bool negative,
                   const std::string& out_prefix) {
    MeshState mesh = read_obj(in_path);
    require_closed_manifold(mesh);
    compute_lumped_masses(mesh, 0.1, 0.1);

    NormalFlowConfig nf;
    nf.beta = negative ? -std::abs(beta) : std::abs(beta);
    nf.alpha_smooth = alpha;
    nf.outer_iterations = iters;
    ResolveConfig cfg;
    cfg.color_seed = color_seed_from_env();

    Positions x = mesh.positions;
    for (int it = 0; it < iters; ++it) {
        ResolveResult res = normal_flow_iteration(mesh, x, nf, cfg);
        x = std::move(res.x);
        char name[256];
        std::snprintf(name, sizeof(name), "%s_%03d.obj", out_prefix.c_str(), it);
        write_obj(name, mesh, x);
        std::cout << "iteration " << it << ": steps=" << res.stats.steps
                  << " residual=" << res.stats.final_residual << "\n";
    }
    return 0;
}

int cmd_certify(const std::string& frames_dir) {
    namespace fs = std::filesystem;
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(frames_dir))
        if (e.path().extension() == ".obj") files.push_back(e.path().string());
    std::sort(files.begin(), files.end());
    if (files.size() < 2) throw std::runtime_error("certify: need at least two OBJ frames");

    MeshState mesh = read_obj(files[0]);
    std::vector<Positions> states;
    states.push_back(mesh.positions);
    for (size_t i = 1; i < files.size(); ++i) {
        MeshState f = read_obj(files[i]);
        if (f.num_vertices() != mesh.num_vertices())
            throw std::runtime_error("certify: vertex count changed at " + files[i]);
        states.push_back(f.positions);
    }
    const testkit::CcdReport rep = testkit::ccd_certify_path(states, mesh);
    std::cout << "certified " << states.size() - 1 << " frame segments: " << rep.certain_count()
              << " intersections (" << rep.violations.size() - rep.certain_count()
              << " uncertain)\n";
    return rep.certain_count() > 0 ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-way continuous collision handling"};
    app.require_subcommand(1);

    std::string config_path, x_path, y_path, out_path = "repaired.obj";
    std::string nf_in, nf_prefix = "flow";
    std::string frames_dir;
    double eps = 1e-4, beta = 5e-4, alpha = 0.5;
    int limit = 512, iters = 20;
    bool certify = false, negative = false;

    auto* sim = app.add_subcommand("simulate", "run a scene config");
    sim->add_option("config", config_path, "scene JSON")->required();
    sim->add_flag("--certify", certify, "run the CCD oracle over every resolve segment");

    auto* rep = app.add_subcommand("repair", "project a penetrating OBJ pair");
    rep->add_option("x", x_path, "intersection-free state OBJ")->required();
    rep->add_option("y", y_path, "penetrating target OBJ")->required();
    rep->add_option("out", out_path, "output OBJ")->required();
    rep->add_option("--eps", eps, "termination threshold");
    rep->add_option("--limit", limit, "step limit");
    rep->add_flag("--certify", certify, "certify the generated path");

    auto* nf = app.add_subcommand("normalflow", "globally injective normal flow");
    nf->add_option("mesh", nf_in, "closed manifold OBJ")->required();
    nf->add_option("--beta", beta, "flow speed (m per iteration)");
    nf->add_option("--alpha", alpha, "smoothing intensity");
    nf->add_option("--iters", iters, "outer iterations");
    nf->add_flag("--negative", negative, "flow inward");
    nf->add_option("--out", nf_prefix, "output prefix");

    auto* cert = app.add_subcommand("certify", "certify an emitted frame sequence");
    cert->add_option("frames", frames_dir, "directory of frame OBJs")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return cmd_simulate(config_path, certify);
        if (rep->parsed()) return cmd_repair(x_path, y_path, out_path, eps, limit, certify);
        if (nf->parsed()) return cmd_normalflow(nf_in, beta, alpha, iters, negative, nf_prefix);
        if (cert->parsed()) return cmd_certify(frames_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
