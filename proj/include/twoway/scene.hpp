#pragma once

#include <iosfwd>
#include <string>

#include "twoway/dynamics.hpp"

namespace twoway {

/// JSON scene description for the simulate command.
struct SceneConfig {
    struct MeshEntry {
        std::string obj_path;
        double density = 0.1;       // kg/m^2 (triangles) and kg/m (strands)
        Vec3 velocity = Vec3::Zero();
        bool static_collider = false;
        std::vector<int> pinned;    // extra vertices fixed in place
    };
    std::vector<MeshEntry> meshes;
    EnergyModel model;
    ResolveConfig resolve;
    int frames = 10;
    std::string output_dir = "out";
};

/// Parses the scene JSON; throws std::runtime_error with context on errors.
SceneConfig load_scene(const std::string& path);
SceneConfig parse_scene(const std::string& json_text, const std::string& name);

/// Loads and merges the entry meshes into one state with lumped masses.
MeshState build_scene_mesh(const SceneConfig& scene);

struct SimulateOutcome {
    int frames_written = 0;
    int certified_segments = 0;
    int certain_violations = 0;
    int uncertain_violations = 0;
};

/// Runs the scene for `frames` steps, writing frame_%04d.obj and stats.csv
/// (columns: frame,resolve_steps,searches,residual,ms) into output_dir.
/// With `certify`, every recorded resolve segment is checked by the CCD
/// oracle and the outcome totals are filled in.
SimulateOutcome run_simulation(const SceneConfig& scene, bool certify, std::ostream& log);

}  // namespace twoway
