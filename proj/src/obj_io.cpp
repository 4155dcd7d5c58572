#include "twoway/obj_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace twoway {

namespace {

// "3", "3/1", "3/1/2", "3//2" -> 3
int parse_index(const std::string& tok, int line_no, int nverts) {
    size_t slash = tok.find('/');
    int idx = 0;
    try {
        idx = std::stoi(slash == std::string::npos ? tok : tok.substr(0, slash));
    } catch (const std::exception&) {
        throw std::runtime_error("obj: bad index '" + tok + "' at line " + std::to_string(line_no));
    }
    if (idx < 0) idx = nverts + 1 + idx;  // negative indices count from the end
    if (idx < 1 || idx > nverts)
        throw std::runtime_error("obj: index out of range at line " + std::to_string(line_no));
    return idx - 1;
}

}  // namespace

MeshState read_obj_stream(std::istream& in, const std::string& name) {
    MeshState mesh;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ss(line);
        std::string tag;
        if (!(ss >> tag) || tag.empty() || tag[0] == '#') continue;
        if (tag == "v") {
            double x, y, z;
            if (!(ss >> x >> y >> z))
                throw std::runtime_error(name + ": malformed vertex at line " +
                                         std::to_string(line_no));
            mesh.positions.emplace_back(x, y, z);
        } else if (tag == "f") {
            std::vector<int> ids;
            std::string tok;
            while (ss >> tok) ids.push_back(parse_index(tok, line_no, mesh.num_vertices()));
            if (ids.size() < 3)
                throw std::runtime_error(name + ": face needs 3 indices at line " +
                                         std::to_string(line_no));
            for (size_t k = 1; k + 1 < ids.size(); ++k)  // fan-triangulate
                mesh.triangles.push_back({ids[0], ids[k], ids[k + 1]});
        } else if (tag == "l") {
            std::vector<int> ids;
            std::string tok;
            while (ss >> tok) ids.push_back(parse_index(tok, line_no, mesh.num_vertices()));
            if (ids.size() < 2)
                throw std::runtime_error(name + ": line needs 2 indices at line " +
                                         std::to_string(line_no));
            for (size_t k = 0; k + 1 < ids.size(); ++k)
                mesh.strand_edges.push_back({ids[k], ids[k + 1]});
        }
        // other records (vn, vt, o, g, usemtl, ...) are ignored
    }
    mesh.finalize();
    mesh.validate();
    return mesh;
}

MeshState read_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("obj: cannot open '" + path + "'");
    return read_obj_stream(in, path);
}

void write_obj(const std::string& path, const MeshState& mesh, PositionsView positions) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("obj: cannot write '" + path + "'");
    for (const Vec3& p : positions)
        std::fprintf(f, "v %.9g %.9g %.9g\n", p.x(), p.y(), p.z());
    for (const auto& t : mesh.triangles)
        std::fprintf(f, "f %d %d %d\n", t[0] + 1, t[1] + 1, t[2] + 1);
    for (const auto& e : mesh.strand_edges)
        std::fprintf(f, "l %d %d\n", e[0] + 1, e[1] + 1);
    std::fclose(f);
}

void write_obj(const std::string& path, const MeshState& mesh) {
    write_obj(path, mesh, mesh.positions);
}

}  // namespace twoway
