#include "mandikin/io.hpp"

#include "text.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <map>
#include <sstream>

namespace mandikin::io {

using detail::fail;
using detail::Line;
using detail::parse_count;
using detail::parse_double;
using detail::parse_integer;
using detail::split_lines;
using detail::split_whitespace;

namespace {

void add_polygon(TriangleMesh& mesh, const std::vector<long long>& idx, std::size_t line) {
    if (idx.size() < 3) {
        fail(line, "face has fewer than 3 vertices");
    }
    if (idx.size() > 4) {
        fail(line, "faces with more than 4 vertices are not supported");
    }
    for (long long i : idx) {
        if (i < 0 || static_cast<std::size_t>(i) >= mesh.vertices.size()) {
            fail(line, "face index " + std::to_string(i) + " out of range");
        }
    }
    auto u = [&](std::size_t k) { return static_cast<std::uint32_t>(idx[k]); };
    mesh.faces.push_back({u(0), u(1), u(2)});
    if (idx.size() == 4) {
        mesh.faces.push_back({u(0), u(2), u(3)});
    }
}

void finish(const TriangleMesh& mesh) {
    try {
        validate(mesh);
    } catch (const IoError& e) {
        throw IoError(std::string("invalid mesh: ") + e.what());
    }
}

// ---------------------------------------------------------------- PLY

struct PlyElement {
    std::string name;
    std::size_t count = 0;
    std::vector<std::string> properties;  // scalar property names, in order
    bool has_list = false;
    std::size_t line = 0;
};

TriangleMesh parse_ply(std::string_view bytes) {
    const std::vector<Line> lines = split_lines(bytes);
    if (lines.empty() || lines[0].text != "ply") {
        fail(1, "missing 'ply' magic");
    }
    std::vector<PlyElement> elements;
    std::size_t pos = 1;
    bool format_seen = false;
    bool header_done = false;
    for (; pos < lines.size(); ++pos) {
        const auto tok = split_whitespace(lines[pos].text);
        const std::size_t ln = lines[pos].number;
        if (tok.empty()) continue;
        if (tok[0] == "end_header") {
            header_done = true;
            ++pos;
            break;
        }
        if (tok[0] == "comment" || tok[0] == "obj_info") continue;
        if (tok[0] == "format") {
            if (tok.size() != 3 || tok[1] != "ascii") {
                fail(ln, "only 'format ascii 1.0' is supported");
            }
            format_seen = true;
        } else if (tok[0] == "element") {
            if (tok.size() != 3) fail(ln, "malformed element line");
            elements.push_back({std::string(tok[1]), parse_count(tok[2], ln), {}, false, ln});
        } else if (tok[0] == "property") {
            if (elements.empty()) fail(ln, "property before any element");
            if (tok.size() == 5 && tok[1] == "list") {
                elements.back().has_list = true;
                elements.back().properties.emplace_back(tok[4]);
            } else if (tok.size() == 3) {
                elements.back().properties.emplace_back(tok[2]);
            } else {
                fail(ln, "malformed property line");
            }
        } else {
            fail(ln, "unknown header keyword '" + std::string(tok[0].substr(0, 32)) + "'");
        }
    }
    if (!format_seen) fail(lines.empty() ? 1 : lines.back().number, "missing format line");
    if (!header_done) fail(lines.empty() ? 1 : lines.back().number, "missing end_header");

    std::size_t remaining = lines.size() - pos;
    for (const auto& el : elements) {
        if (el.count > remaining) {
            fail(el.line, "element '" + el.name + "' count exceeds the data lines in the file");
        }
        remaining -= el.count;
    }

    TriangleMesh mesh;
    for (const auto& el : elements) {
        if (el.name == "vertex") {
            if (el.has_list) fail(el.line, "list properties on vertices are not supported");
            auto find = [&](const char* n) -> int {
                const auto it = std::find(el.properties.begin(), el.properties.end(), n);
                return it == el.properties.end() ? -1 : static_cast<int>(it - el.properties.begin());
            };
            const int ix = find("x"), iy = find("y"), iz = find("z");
            const int inx = find("nx"), iny = find("ny"), inz = find("nz");
            if (ix < 0 || iy < 0 || iz < 0) fail(el.line, "vertex element lacks x/y/z");
            const bool normals = inx >= 0 && iny >= 0 && inz >= 0;
            mesh.vertices.reserve(el.count);
            for (std::size_t i = 0; i < el.count; ++i, ++pos) {
                const auto tok = split_whitespace(lines[pos].text);
                const std::size_t ln = lines[pos].number;
                if (tok.size() != el.properties.size()) {
                    fail(ln, "expected " + std::to_string(el.properties.size()) + " vertex values");
                }
                std::vector<double> vals;
                vals.reserve(tok.size());
                for (auto t : tok) vals.push_back(parse_double(t, ln));
                mesh.vertices.emplace_back(vals[ix], vals[iy], vals[iz]);
                if (normals) mesh.normals.emplace_back(vals[inx], vals[iny], vals[inz]);
            }
        } else if (el.name == "face") {
            if (!el.has_list || el.properties.size() != 1) {
                fail(el.line, "face element must have exactly one list property");
            }
            for (std::size_t i = 0; i < el.count; ++i, ++pos) {
                const auto tok = split_whitespace(lines[pos].text);
                const std::size_t ln = lines[pos].number;
                if (tok.empty()) fail(ln, "empty face line");
                const std::size_t n = parse_count(tok[0], ln);
                if (tok.size() != n + 1) fail(ln, "face vertex count does not match its list");
                std::vector<long long> idx;
                for (std::size_t k = 1; k < tok.size(); ++k) idx.push_back(parse_integer(tok[k], ln));
                add_polygon(mesh, idx, ln);
            }
        } else {
            pos += el.count;  // unknown element, skipped
        }
    }
    for (; pos < lines.size(); ++pos) {
        if (!split_whitespace(lines[pos].text).empty()) {
            fail(lines[pos].number, "unexpected data after the last element");
        }
    }
    finish(mesh);
    return mesh;
}

std::string format_ply(const TriangleMesh& mesh) {
    const bool normals = mesh.normals.size() == mesh.vertices.size() && !mesh.normals.empty();
    std::ostringstream os;
    os << "ply\nformat ascii 1.0\nelement vertex " << mesh.vertices.size() << "\n"
       << "property double x\nproperty double y\nproperty double z\n";
    if (normals) os << "property double nx\nproperty double ny\nproperty double nz\n";
    os << "element face " << mesh.faces.size() << "\nproperty list uchar int vertex_indices\nend_header\n";
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        const Vec3& v = mesh.vertices[i];
        os << format_sig17(v.x()) << ' ' << format_sig17(v.y()) << ' ' << format_sig17(v.z());
        if (normals) {
            const Vec3& n = mesh.normals[i];
            os << ' ' << format_sig17(n.x()) << ' ' << format_sig17(n.y()) << ' ' << format_sig17(n.z());
        }
        os << '\n';
    }
    for (const Face& f : mesh.faces) {
        os << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
    }
    return os.str();
}

// ---------------------------------------------------------------- OBJ

TriangleMesh parse_obj(std::string_view bytes) {
    TriangleMesh mesh;
    for (const Line& line : split_lines(bytes)) {
        const auto tok = split_whitespace(line.text);
        if (tok.empty() || tok[0].front() == '#') continue;
        if (tok[0] == "v") {
            if (tok.size() != 4 && tok.size() != 5) fail(line.number, "vertex needs 3 coordinates");
            mesh.vertices.emplace_back(parse_double(tok[1], line.number), parse_double(tok[2], line.number),
                                       parse_double(tok[3], line.number));
        } else if (tok[0] == "f") {
            std::vector<long long> idx;
            for (std::size_t k = 1; k < tok.size(); ++k) {
                const std::string_view ref = tok[k].substr(0, tok[k].find('/'));
                long long i = parse_integer(ref, line.number);
                if (i == 0) fail(line.number, "OBJ indices are 1-based");
                i = i > 0 ? i - 1 : static_cast<long long>(mesh.vertices.size()) + i;
                idx.push_back(i);
            }
            add_polygon(mesh, idx, line.number);
        } else if (tok[0] == "vn" || tok[0] == "vt" || tok[0] == "vp" || tok[0] == "o" || tok[0] == "g" ||
                   tok[0] == "s" || tok[0] == "usemtl" || tok[0] == "mtllib" || tok[0] == "l") {
            continue;
        } else {
            fail(line.number, "unknown OBJ statement '" + std::string(tok[0].substr(0, 32)) + "'");
        }
    }
    finish(mesh);
    return mesh;
}

std::string format_obj(const TriangleMesh& mesh) {
    std::ostringstream os;
    for (const Vec3& v : mesh.vertices) {
        os << "v " << format_sig17(v.x()) << ' ' << format_sig17(v.y()) << ' ' << format_sig17(v.z()) << '\n';
    }
    for (const Face& f : mesh.faces) {
        os << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
    }
    return os.str();
}

// ---------------------------------------------------------------- STL

// Shared vertex welding: identical float positions become one vertex.
class Welder {
public:
    std::uint32_t add(TriangleMesh& mesh, const Vec3& p) {
        const std::array<double, 3> key{p.x(), p.y(), p.z()};
        const auto [it, inserted] = ids_.try_emplace(key, static_cast<std::uint32_t>(mesh.vertices.size()));
        if (inserted) mesh.vertices.push_back(p);
        return it->second;
    }

private:
    std::map<std::array<double, 3>, std::uint32_t> ids_;
};

TriangleMesh parse_stl_ascii(std::string_view bytes) {
    const std::vector<Line> lines = split_lines(bytes);
    TriangleMesh mesh;
    Welder welder;
    std::size_t i = 0;
    auto next_tokens = [&](std::vector<std::string_view>& tok) {
        while (i < lines.size()) {
            tok = split_whitespace(lines[i].text);
            ++i;
            if (!tok.empty()) return lines[i - 1].number;
        }
        fail(lines.empty() ? 1 : lines.back().number + 1, "unexpected end of file");
    };
    std::vector<std::string_view> tok;
    std::size_t ln = next_tokens(tok);
    if (tok[0] != "solid") fail(ln, "missing 'solid'");
    while (true) {
        ln = next_tokens(tok);
        if (tok[0] == "endsolid") break;
        if (tok[0] != "facet") fail(ln, "expected 'facet' or 'endsolid'");
        ln = next_tokens(tok);
        if (tok.size() != 2 || tok[0] != "outer" || tok[1] != "loop") fail(ln, "expected 'outer loop'");
        std::array<std::uint32_t, 3> ids{};
        for (int k = 0; k < 3; ++k) {
            ln = next_tokens(tok);
            if (tok.size() != 4 || tok[0] != "vertex") fail(ln, "expected 'vertex x y z'");
            const Vec3 p(parse_double(tok[1], ln), parse_double(tok[2], ln), parse_double(tok[3], ln));
            ids[k] = welder.add(mesh, p);
        }
        ln = next_tokens(tok);
        if (tok[0] != "endloop") fail(ln, "expected 'endloop'");
        ln = next_tokens(tok);
        if (tok[0] != "endfacet") fail(ln, "expected 'endfacet'");
        mesh.faces.push_back(ids);
    }
    for (; i < lines.size(); ++i) {
        if (!split_whitespace(lines[i].text).empty()) fail(lines[i].number, "unexpected data after 'endsolid'");
    }
    finish(mesh);
    return mesh;
}

std::string format_stl_ascii(const TriangleMesh& mesh) {
    std::ostringstream os;
    // Float32 precision, written so it reads back to exactly the float value.
    auto f9 = [](double v) { return format_decimal(static_cast<double>(static_cast<float>(v))); };
    os << "solid mandikin\n";
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const Vec3 n = mesh.face_normal(f);
        os << "  facet normal " << f9(n.x()) << ' ' << f9(n.y()) << ' ' << f9(n.z()) << "\n    outer loop\n";
        for (std::uint32_t idx : mesh.faces[f]) {
            const Vec3& v = mesh.vertices[idx];
            os << "      vertex " << f9(v.x()) << ' ' << f9(v.y()) << ' ' << f9(v.z()) << '\n';
        }
        os << "    endloop\n  endfacet\n";
    }
    os << "endsolid mandikin\n";
    return os.str();
}

static_assert(std::endian::native == std::endian::little, "binary STL I/O assumes a little-endian host");

TriangleMesh parse_stl_binary(std::string_view bytes) {
    if (bytes.size() < 84) {
        throw IoError("offset " + std::to_string(bytes.size()) + ": binary STL shorter than its 84-byte header");
    }
    std::uint32_t count = 0;
    std::memcpy(&count, bytes.data() + 80, 4);
    const std::uint64_t expected = 84ULL + 50ULL * count;
    if (bytes.size() != expected) {
        throw IoError("offset " + std::to_string(std::min<std::uint64_t>(bytes.size(), expected)) +
                      ": binary STL size does not match its triangle count " + std::to_string(count));
    }
    TriangleMesh mesh;
    Welder welder;
    for (std::uint32_t t = 0; t < count; ++t) {
        const std::size_t base = 84 + 50ULL * t;
        float f[12];
        std::memcpy(f, bytes.data() + base, sizeof f);
        std::array<std::uint32_t, 3> ids{};
        for (int k = 0; k < 3; ++k) {
            const Vec3 p(f[3 + 3 * k], f[4 + 3 * k], f[5 + 3 * k]);
            if (!p.allFinite()) {
                throw IoError("offset " + std::to_string(base + 12 + 12 * k) + ": vertex is not finite");
            }
            ids[k] = welder.add(mesh, p);
        }
        mesh.faces.push_back(ids);
    }
    finish(mesh);
    return mesh;
}

std::string format_stl_binary(const TriangleMesh& mesh) {
    std::string out(84 + 50 * mesh.faces.size(), '\0');
    const char tag[] = "mandikin binary STL";
    std::memcpy(out.data(), tag, sizeof tag - 1);
    const auto count = static_cast<std::uint32_t>(mesh.faces.size());
    std::memcpy(out.data() + 80, &count, 4);
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        float vals[12];
        const Vec3 n = mesh.face_normal(f);
        for (int k = 0; k < 3; ++k) vals[k] = static_cast<float>(n[k]);
        for (int v = 0; v < 3; ++v) {
            const Vec3& p = mesh.vertices[mesh.faces[f][v]];
            for (int k = 0; k < 3; ++k) vals[3 + 3 * v + k] = static_cast<float>(p[k]);
        }
        std::memcpy(out.data() + 84 + 50 * f, vals, sizeof vals);
    }
    return out;
}

}  // namespace

MeshFormat mesh_format_for(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".ply") return MeshFormat::ply_ascii;
    if (ext == ".obj") return MeshFormat::obj;
    if (ext == ".stl") return MeshFormat::stl_binary;
    throw IoError("unknown mesh extension '" + ext + "' for " + path.string());
}

MeshFormat detect_stl_format(std::string_view bytes) {
    if (bytes.size() >= 84) {
        std::uint32_t count = 0;
        std::memcpy(&count, bytes.data() + 80, 4);
        if (84ULL + 50ULL * count == bytes.size()) return MeshFormat::stl_binary;
    }
    if (bytes.substr(0, 5) == "solid") return MeshFormat::stl_ascii;
    return MeshFormat::stl_binary;
}

TriangleMesh parse_mesh(std::string_view bytes, MeshFormat format) {
    switch (format) {
        case MeshFormat::ply_ascii:
            return parse_ply(bytes);
        case MeshFormat::stl_ascii:
            return parse_stl_ascii(bytes);
        case MeshFormat::stl_binary:
            return parse_stl_binary(bytes);
        case MeshFormat::obj:
            return parse_obj(bytes);
    }
    throw IoError("unknown mesh format");
}

std::string format_mesh(const TriangleMesh& mesh, MeshFormat format) {
    switch (format) {
        case MeshFormat::ply_ascii:
            return format_ply(mesh);
        case MeshFormat::stl_ascii:
            return format_stl_ascii(mesh);
        case MeshFormat::stl_binary:
            return format_stl_binary(mesh);
        case MeshFormat::obj:
            return format_obj(mesh);
    }
    throw IoError("unknown mesh format");
}

TriangleMesh load_mesh(const std::filesystem::path& path) {
    MeshFormat format = mesh_format_for(path);
    const std::string bytes = read_file(path);
    if (format == MeshFormat::stl_binary) format = detect_stl_format(bytes);
    try {
        return parse_mesh(bytes, format);
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

TriangleMesh load_mesh(const std::filesystem::path& path, MeshFormat format) {
    try {
        return parse_mesh(read_file(path), format);
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path) {
    save_mesh(mesh, path, mesh_format_for(path));
}

void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path, MeshFormat format) {
    write_file(path, format_mesh(mesh, format));
}

}  // namespace mandikin::io
