#include "mandikin/radiograph.hpp"

#include <algorithm>
#include <array>
#include <unordered_map>
#include <vector>

namespace mandikin {

namespace {

// Cell corners are numbered by bit pattern: bit 0 = +x, bit 1 = +y, bit 2 = +z.
// Cell edges join corners differing in one bit.
struct CellEdge {
    int a;
    int b;
    int axis;
};

// Interpolation parameters are kept this far from the corners so that corner
// values equal to the iso level never collapse triangles.
constexpr double kEdgeClamp = 1e-3;

struct CaseTable {
    std::array<CellEdge, 12> edges{};
    // Per corner mask: triangles as triples of cell-edge ids, outward = toward values <= iso.
    std::array<std::vector<std::array<int, 3>>, 256> triangles;
};

Vec3 corner_pos(int c) { return Vec3(c & 1, (c >> 1) & 1, (c >> 2) & 1); }

// Builds the 256-case triangulation from face rules rather than a literal
// table. On each cell face the crossing segments are oriented so the above-iso
// side is on their left seen from outside, and on ambiguous faces above-iso
// corners are cut off separately. Neighbouring cells see a shared face with
// the same corner states, so they make the same choice and the surface closes.
CaseTable build_table() {
    CaseTable table;
    int e = 0;
    std::array<std::array<int, 8>, 8> edge_of{};
    for (auto& row : edge_of) row.fill(-1);
    for (int c = 0; c < 8; ++c) {
        for (int axis = 0; axis < 3; ++axis) {
            if (!(c & (1 << axis))) {
                const int d = c | (1 << axis);
                table.edges[e] = {c, d, axis};
                edge_of[c][d] = edge_of[d][c] = e;
                ++e;
            }
        }
    }

    // Faces as counter-clockwise corner cycles seen from outside the cell.
    std::vector<std::array<int, 4>> faces;
    for (int axis = 0; axis < 3; ++axis) {
        const int b1 = 1 << ((axis + 1) % 3);
        const int b2 = 1 << ((axis + 2) % 3);
        for (int side = 0; side < 2; ++side) {
            const int base = side ? (1 << axis) : 0;
            std::array<int, 4> cyc{base, base | b1, base | b1 | b2, base | b2};
            Vec3 outward = Vec3::Zero();
            outward[axis] = side ? 1.0 : -1.0;
            const Vec3 n = (corner_pos(cyc[1]) - corner_pos(cyc[0])).cross(corner_pos(cyc[2]) - corner_pos(cyc[1]));
            if (n.dot(outward) < 0.0) {
                std::swap(cyc[1], cyc[3]);
            }
            faces.push_back(cyc);
        }
    }

    for (int mask = 0; mask < 256; ++mask) {
        auto above = [mask](int c) { return (mask >> c) & 1; };
        std::array<int, 12> next;
        next.fill(-1);
        for (const auto& cyc : faces) {
            // Position k in the cycle denotes the edge cyc[k] -> cyc[k+1].
            std::array<int, 4> kind{};  // 0 none, 1 exit (above -> below), 2 entry
            for (int k = 0; k < 4; ++k) {
                const int from = cyc[k];
                const int to = cyc[(k + 1) % 4];
                kind[k] = above(from) == above(to) ? 0 : (above(from) ? 1 : 2);
            }
            for (int k = 0; k < 4; ++k) {
                if (kind[k] != 1) continue;
                for (int back = 1; back < 4; ++back) {
                    const int j = (k - back + 4) % 4;
                    if (kind[j] == 2) {
                        const int exit_edge = edge_of[cyc[k]][cyc[(k + 1) % 4]];
                        const int entry_edge = edge_of[cyc[j]][cyc[(j + 1) % 4]];
                        next[exit_edge] = entry_edge;
                        break;
                    }
                }
            }
        }
        std::array<bool, 12> used{};
        for (int start = 0; start < 12; ++start) {
            if (next[start] < 0 || used[start]) continue;
            std::vector<int> loop;
            for (int cur = start; !used[cur]; cur = next[cur]) {
                used[cur] = true;
                loop.push_back(cur);
            }
            // Segments circle the above-iso side counter-clockwise; reverse the
            // fan so normals face the below-iso side.
            for (std::size_t i = 1; i + 1 < loop.size(); ++i) {
                table.triangles[mask].push_back({loop[0], loop[i + 1], loop[i]});
            }
        }
    }
    return table;
}

const CaseTable& case_table() {
    static const CaseTable table = build_table();
    return table;
}

}  // namespace

TriangleMesh extract_isosurface(const VoxelVolume& v, double iso) {
    v.check();
    TriangleMesh mesh;
    if (v.dims[0] < 2 || v.dims[1] < 2 || v.dims[2] < 2) {
        return mesh;
    }
    const CaseTable& table = case_table();
    std::unordered_map<std::uint64_t, std::uint32_t> vertex_of_edge;

    auto edge_vertex = [&](std::size_t i, std::size_t j, std::size_t k, const CellEdge& ce) {
        const std::size_t gi = i + (ce.a & 1);
        const std::size_t gj = j + ((ce.a >> 1) & 1);
        const std::size_t gk = k + ((ce.a >> 2) & 1);
        const std::uint64_t key = static_cast<std::uint64_t>(v.index(gi, gj, gk)) * 3 + ce.axis;
        const auto found = vertex_of_edge.find(key);
        if (found != vertex_of_edge.end()) {
            return found->second;
        }
        std::size_t hi[3] = {gi, gj, gk};
        hi[ce.axis] += 1;
        const double va = v.at(gi, gj, gk);
        const double vb = v.at(hi[0], hi[1], hi[2]);
        double t = (iso - va) / (vb - va);
        t = std::clamp(t, kEdgeClamp, 1.0 - kEdgeClamp);
        const Vec3 pa = v.center(gi, gj, gk);
        const Vec3 pb = v.center(hi[0], hi[1], hi[2]);
        const auto id = static_cast<std::uint32_t>(mesh.vertices.size());
        mesh.vertices.push_back(pa + t * (pb - pa));
        vertex_of_edge.emplace(key, id);
        return id;
    };

    for (std::size_t k = 0; k + 1 < v.dims[2]; ++k) {
        for (std::size_t j = 0; j + 1 < v.dims[1]; ++j) {
            for (std::size_t i = 0; i + 1 < v.dims[0]; ++i) {
                int mask = 0;
                for (int c = 0; c < 8; ++c) {
                    if (v.at(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1)) > iso) {
                        mask |= 1 << c;
                    }
                }
                for (const auto& tri : table.triangles[mask]) {
                    mesh.faces.push_back({edge_vertex(i, j, k, table.edges[tri[0]]),
                                          edge_vertex(i, j, k, table.edges[tri[1]]),
                                          edge_vertex(i, j, k, table.edges[tri[2]])});
                }
            }
        }
    }
    return mesh;
}

}  // namespace mandikin
