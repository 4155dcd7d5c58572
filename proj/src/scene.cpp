#include "twoway/scene.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "twoway/obj_io.hpp"
#include "twoway/testkit/ccd.hpp"

namespace twoway {

namespace {

using nlohmann::json;

Vec3 parse_vec3(const json& j) { return Vec3(j.at(0), j.at(1), j.at(2)); }

SolverKind parse_solver(const std::string& s) {
    if (s == "pgs") return SolverKind::Pgs;
    if (s == "jacobi") return SolverKind::Jacobi;
    if (s == "al20") return SolverKind::Al20;
    if (s == "al100") return SolverKind::Al100;
    throw std::runtime_error("scene: unknown solver '" + s + "'");
}

void parse_resolve(const json& j, ResolveConfig& cfg) {
    cfg.step_limit = j.value("step_limit", cfg.step_limit);
    cfg.eps = j.value("eps", cfg.eps);
    cfg.d_min = j.value("d_min", cfg.d_min);
    cfg.d_max = j.value("d_max", cfg.d_max);
    cfg.delta = j.value("delta", cfg.delta);
    cfg.sigma = j.value("sigma", cfg.sigma);
    cfg.gamma = j.value("gamma", cfg.gamma);
    cfg.sweeps = j.value("sweeps", cfg.sweeps);
    cfg.under_relax = j.value("under_relax", cfg.under_relax);
    cfg.edge_constraints = j.value("edge_constraints", cfg.edge_constraints);
    cfg.force_fresh_search = j.value("force_fresh_search", cfg.force_fresh_search);
    if (j.contains("solver")) cfg.solver = parse_solver(j.at("solver"));
    if (j.contains("constraint_family")) {
        const std::string fam = j.at("constraint_family");
        if (fam == "volume") cfg.family = ConstraintFamily::Volume;
        else if (fam == "gap") cfg.family = ConstraintFamily::Gap;
        else throw std::runtime_error("scene: unknown constraint_family '" + fam + "'");
    }
}

}  // namespace

SceneConfig parse_scene(const std::string& text, const std::string& name) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(name + ": " + e.what());
    }
    SceneConfig scene;
    try {
        for (const auto& m : j.at("meshes")) {
            SceneConfig::MeshEntry e;
            e.obj_path = m.at("obj");
            e.density = m.value("density", e.density);
            e.static_collider = m.value("static", false);
            if (m.contains("velocity")) e.velocity = parse_vec3(m.at("velocity"));
            if (m.contains("pinned")) e.pinned = m.at("pinned").get<std::vector<int>>();
            scene.meshes.push_back(std::move(e));
        }
        EnergyModel& em = scene.model;
        em.spring_stiffness = j.value("spring_stiffness", em.spring_stiffness);
        em.bending_stiffness = j.value("bending_stiffness", em.bending_stiffness);
        em.repulsion_stiffness = j.value("repulsion_stiffness", em.repulsion_stiffness);
        em.dt = j.value("dt", em.dt);
        em.newton_iters = j.value("newton_iterations", em.newton_iters);
        em.mu = j.value("mu", em.mu);
        if (j.contains("gravity")) em.gravity = parse_vec3(j.at("gravity"));
        scene.frames = j.value("frames", scene.frames);
        scene.output_dir = j.value("output_dir", scene.output_dir);
        if (j.contains("resolve")) parse_resolve(j.at("resolve"), scene.resolve);
        em.repulsion_radius = scene.resolve.delta;
    } catch (const json::exception& e) {
        throw std::runtime_error(name + ": " + e.what());
    }
    return scene;
}

SceneConfig load_scene(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("scene: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scene(ss.str(), path);
}

MeshState build_scene_mesh(const SceneConfig& scene) {
    MeshState mesh;
    mesh.finalize();
    for (const auto& entry : scene.meshes) {
        MeshState part = read_obj(entry.obj_path);
        compute_lumped_masses(part, entry.density, entry.density);
        if (entry.static_collider) part.inv_mass.assign(part.positions.size(), 0.0);
        for (int v : entry.pinned) {
            if (v < 0 || v >= part.num_vertices())
                throw std::runtime_error("scene: pinned index out of range in " + entry.obj_path);
            part.inv_mass[v] = 0.0;
        }
        part.velocities.assign(part.positions.size(), entry.velocity);
        append_mesh(mesh, part);
    }
    mesh.validate();
    return mesh;
}

SimulateOutcome run_simulation(const SceneConfig& scene, bool certify, std::ostream& log) {
    namespace fs = std::filesystem;
    SimulateOutcome out;

    MeshState mesh = build_scene_mesh(scene);
    EnergyModel model = scene.model;
    model.prepare(mesh);
    ResolveConfig cfg = scene.resolve;
    cfg.record_path = certify;

    fs::create_directories(scene.output_dir);
    std::ofstream csv(fs::path(scene.output_dir) / "stats.csv");
    csv << "frame,resolve_steps,searches,residual,ms\n";

    for (int frame = 0; frame < scene.frames; ++frame) {
        StepStats st = step(model, mesh, cfg);
        double ms = 0.0, residual = 0.0;
        for (const auto& r : st.resolves) {
            ms += r.wall_ms;
            residual = r.final_residual;
        }
        char row[160];
        std::snprintf(row, sizeof(row), "%d,%d,%d,%.9g,%.3f", frame, st.total_resolve_steps(),
                      st.total_searches(), residual, ms);
        csv << row << "\n";

        char name[64];
        std::snprintf(name, sizeof(name), "frame_%04d.obj", frame);
        write_obj((fs::path(scene.output_dir) / name).string(), mesh);
        ++out.frames_written;

        if (certify) {
            for (const auto& r : st.resolves) {
                for (size_t s = 0; s + 1 < r.path.size(); ++s) {
                    testkit::PathSegment seg{r.path[s], r.path[s + 1], &mesh};
                    const testkit::CcdReport rep = testkit::ccd_certify(seg);
                    ++out.certified_segments;
                    out.certain_violations += rep.certain_count();
                    out.uncertain_violations +=
                        static_cast<int>(rep.violations.size()) - rep.certain_count();
                }
            }
        }
        log << "frame " << frame << ": steps=" << st.total_resolve_steps()
            << " searches=" << st.total_searches() << " residual=" << residual << "\n";
    }
    if (certify)
        log << "certification: " << out.certain_violations << " intersections ("
            << out.uncertain_violations << " uncertain) across " << out.certified_segments
            << " segments\n";
    return out;
}

}  // namespace twoway
