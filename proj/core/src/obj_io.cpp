#include "mealgen/obj_io.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mealgen/error.hpp"

namespace mealgen {

namespace {

Error obj_error(const std::string& msg, int line) {
    Error e = parse_error("OBJ line " + std::to_string(line) + ": " + msg, line);
    return e;
}

// Accepts "v", "v/vt", "v//vn", "v/vt/vn"; returns the vertex index.
long face_vertex_index(const std::string& token, int line) {
    size_t slash = token.find('/');
    std::string head = slash == std::string::npos ? token : token.substr(0, slash);
    if (head.empty()) throw obj_error("empty face vertex reference '" + token + "'", line);
    char* end = nullptr;
    long v = std::strtol(head.c_str(), &end, 10);
    if (end == head.c_str() || *end != '\0' || v == 0)
        throw obj_error("bad face vertex reference '" + token + "'", line);
    return v;
}

} // namespace

TriangleMesh parse_obj(const std::string& text) {
    TriangleMesh mesh;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        std::istringstream line(raw);
        std::string tag;
        if (!(line >> tag) || tag.empty() || tag[0] == '#') continue;

        if (tag == "v") {
            Vec3 p;
            if (!(line >> p.x >> p.y >> p.z))
                throw obj_error("vertex needs three coordinates", lineno);
            if (!p.finite())
                throw obj_error("non-finite vertex coordinate", lineno);
            mesh.positions.push_back(p);
        } else if (tag == "f") {
            std::vector<long> refs;
            std::string tok;
            while (line >> tok) refs.push_back(face_vertex_index(tok, lineno));
            if (refs.size() != 3)
                throw obj_error("face has " + std::to_string(refs.size()) +
                                    " vertices; only triangles are supported",
                                lineno);
            std::array<uint32_t, 3> tri{};
            for (int i = 0; i < 3; ++i) {
                long r = refs[i];
                long n = static_cast<long>(mesh.positions.size());
                long idx = r > 0 ? r - 1 : n + r;  // negative refs are relative
                if (idx < 0 || idx >= n)
                    throw obj_error("face vertex index " + std::to_string(r) + " out of range", lineno);
                tri[i] = static_cast<uint32_t>(idx);
            }
            mesh.triangles.push_back(tri);
        }
        // all other record types (vn, vt, o, g, s, usemtl, ...) ignored
    }
    return mesh;
}

TriangleMesh load_obj(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        Error e(Error::Kind::Io, "cannot open OBJ file: " + file.string());
        e.path = file.string();
        throw e;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_obj(buf.str());
    } catch (Error& e) {
        e.path = file.string();
        throw;
    }
}

} // namespace mealgen
