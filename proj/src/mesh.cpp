#include "mandikin/mesh.hpp"

#include "mandikin/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace mandikin {

namespace {

constexpr std::uint32_t kLeafSize = 4;
constexpr int kPerturbAttempts = 8;
// Box padding for ray traversal; must exceed kEdgeTolerance so that near-miss
// (grazing) triangles are still visited and the index matches the brute scan.
constexpr double kRayBoxPad = 1e-6;

struct TriangleRayResult {
    bool hit = false;
    bool grazing = false;
    double t = 0.0;
    bool entering = false;
};

// Shared by the index and the brute-force scan so both report identical hits.
TriangleRayResult intersect_triangle(const Ray& r, const Vec3& a, const Vec3& b, const Vec3& c, double tmin,
                                     double tmax) {
    TriangleRayResult out;
    const Vec3 e1 = b - a;
    const Vec3 e2 = c - a;
    const Vec3 n = e1.cross(e2);
    const double area2 = n.norm();
    if (area2 == 0.0) {
        return out;
    }
    const double denom = r.direction.dot(n);
    const double plane_offset = (a - r.origin).dot(n);
    if (std::abs(denom) <= 1e-12 * area2) {
        // Ray parallel to the face plane: grazing when it runs inside the plane
        // slab and crosses the padded triangle box.
        if (std::abs(plane_offset) / area2 < kEdgeTolerance) {
            BoundingBox box;
            box.extend(a);
            box.extend(b);
            box.extend(c);
            box.lo.array() -= kEdgeTolerance;
            box.hi.array() += kEdgeTolerance;
            out.grazing = box.clip(r, tmin, tmax).has_value();
        }
        return out;
    }
    const double t = plane_offset / denom;
    if (!(t >= tmin && t <= tmax)) {
        return out;
    }
    const Vec3 p = r.origin + t * r.direction;
    const double inv = 1.0 / (area2 * area2);
    const double wa = (c - b).cross(p - b).dot(n) * inv;
    const double wb = (a - c).cross(p - c).dot(n) * inv;
    const double wc = (b - a).cross(p - a).dot(n) * inv;
    // Distances (mm, signed) from p to the three edge lines.
    const double da = wa * area2 / (c - b).norm();
    const double db = wb * area2 / (a - c).norm();
    const double dc = wc * area2 / (b - a).norm();
    const double dmin = std::min({da, db, dc});
    if (dmin < -kEdgeTolerance) {
        return out;
    }
    out.grazing = dmin < kEdgeTolerance;
    out.hit = dmin >= 0.0;
    out.t = t;
    out.entering = denom < 0.0;
    return out;
}

bool hit_less(const RayHit& x, const RayHit& y) {
    return x.distance < y.distance || (x.distance == y.distance && x.face < y.face);
}

bool nearest_better(double d2, std::uint32_t f, double best_d2, std::uint32_t best_f) {
    return d2 < best_d2 || (d2 == best_d2 && f < best_f);
}

const Vec3 kParityDirection = Vec3(0.3141, 0.5772, 0.7538).normalized();

}  // namespace

double TriangleMesh::face_area(std::size_t f) const {
    const Face& fc = faces[f];
    return 0.5 * (vertices[fc[1]] - vertices[fc[0]]).cross(vertices[fc[2]] - vertices[fc[0]]).norm();
}

Vec3 TriangleMesh::face_normal(std::size_t f) const {
    const Face& fc = faces[f];
    const Vec3 n = (vertices[fc[1]] - vertices[fc[0]]).cross(vertices[fc[2]] - vertices[fc[0]]);
    const double len = n.norm();
    return len > 0.0 ? Vec3(n / len) : Vec3::Zero();
}

double TriangleMesh::surface_area() const {
    double sum = 0.0;
    for (std::size_t f = 0; f < faces.size(); ++f) {
        sum += face_area(f);
    }
    return sum;
}

double TriangleMesh::signed_volume() const {
    double sum = 0.0;
    for (const Face& f : faces) {
        sum += vertices[f[0]].dot(vertices[f[1]].cross(vertices[f[2]]));
    }
    return sum / 6.0;
}

void validate(const TriangleMesh& mesh) {
    if (!mesh.faces.empty() && mesh.vertices.size() < 3) {
        throw IoError("mesh has faces but fewer than 3 vertices");
    }
    if (!mesh.normals.empty() && mesh.normals.size() != mesh.vertices.size()) {
        throw IoError("mesh normal count does not match vertex count");
    }
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        if (!mesh.vertices[i].allFinite()) {
            throw IoError("mesh vertex " + std::to_string(i) + " is not finite");
        }
    }
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        for (std::uint32_t idx : mesh.faces[f]) {
            if (idx >= mesh.vertices.size()) {
                throw IoError("face " + std::to_string(f) + " references vertex " + std::to_string(idx) +
                              " out of range");
            }
        }
        if (mesh.face_area(f) < kDegenerateArea) {
            throw IoError("face " + std::to_string(f) + " is degenerate");
        }
    }
}

bool is_watertight(const TriangleMesh& mesh) {
    if (mesh.faces.empty()) {
        return false;
    }
    std::vector<std::uint64_t> directed;
    directed.reserve(mesh.faces.size() * 3);
    for (const Face& f : mesh.faces) {
        for (int k = 0; k < 3; ++k) {
            const std::uint64_t u = f[k];
            const std::uint64_t v = f[(k + 1) % 3];
            if (u == v) {
                return false;
            }
            directed.push_back(u << 32 | v);
        }
    }
    std::sort(directed.begin(), directed.end());
    if (std::adjacent_find(directed.begin(), directed.end()) != directed.end()) {
        return false;  // an edge used twice in the same direction
    }
    for (std::uint64_t e : directed) {
        const std::uint64_t reversed = (e & 0xffffffffULL) << 32 | e >> 32;
        if (!std::binary_search(directed.begin(), directed.end(), reversed)) {
            return false;
        }
    }
    return true;
}

TriangleMesh transform_mesh(const TriangleMesh& mesh, const RigidTransform& t) {
    if (t.is_exact_identity()) {
        return mesh;
    }
    TriangleMesh out;
    out.faces = mesh.faces;
    out.vertices.reserve(mesh.vertices.size());
    for (const Vec3& v : mesh.vertices) {
        out.vertices.push_back(t.apply(v));
    }
    out.normals.reserve(mesh.normals.size());
    for (const Vec3& n : mesh.normals) {
        out.normals.push_back(t.apply_direction(n));
    }
    return out;
}

TriangleMesh merge(const std::vector<TriangleMesh>& parts) {
    TriangleMesh out;
    bool all_normals = true;
    for (const TriangleMesh& p : parts) {
        all_normals = all_normals && p.normals.size() == p.vertices.size() && !p.vertices.empty();
    }
    for (const TriangleMesh& p : parts) {
        const auto base = static_cast<std::uint32_t>(out.vertices.size());
        out.vertices.insert(out.vertices.end(), p.vertices.begin(), p.vertices.end());
        if (all_normals) {
            out.normals.insert(out.normals.end(), p.normals.begin(), p.normals.end());
        }
        for (const Face& f : p.faces) {
            out.faces.push_back({f[0] + base, f[1] + base, f[2] + base});
        }
    }
    return out;
}

Ray Ray::through(const Vec3& origin, const Vec3& direction) {
    const double n = direction.norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
        throw NumericError("ray direction has zero length");
    }
    return {origin, direction / n};
}

double BoundingBox::squared_distance(const Vec3& p) const {
    const Vec3 d = (lo - p).cwiseMax(p - hi).cwiseMax(0.0);
    return d.squaredNorm();
}

std::optional<std::pair<double, double>> BoundingBox::clip(const Ray& r, double tmin, double tmax) const {
    double t0 = tmin;
    double t1 = tmax;
    for (int k = 0; k < 3; ++k) {
        const double o = r.origin[k];
        const double d = r.direction[k];
        if (d == 0.0) {
            if (o < lo[k] || o > hi[k]) {
                return std::nullopt;
            }
            continue;
        }
        double ta = (lo[k] - o) / d;
        double tb = (hi[k] - o) / d;
        if (ta > tb) {
            std::swap(ta, tb);
        }
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
        if (t0 > t1) {
            return std::nullopt;
        }
    }
    return std::make_pair(t0, t1);
}

BoundingBox bounds(const TriangleMesh& mesh) {
    BoundingBox box;
    for (const Vec3& v : mesh.vertices) {
        box.extend(v);
    }
    return box;
}

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    // Voronoi-region walk (Ericson, Real-Time Collision Detection 5.1.5).
    const Vec3 ab = b - a;
    const Vec3 ac = c - a;
    const Vec3 ap = p - a;
    const double d1 = ab.dot(ap);
    const double d2 = ac.dot(ap);
    if (d1 <= 0.0 && d2 <= 0.0) {
        return a;
    }
    const Vec3 bp = p - b;
    const double d3 = ab.dot(bp);
    const double d4 = ac.dot(bp);
    if (d3 >= 0.0 && d4 <= d3) {
        return b;
    }
    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
        return a + (d1 / (d1 - d3)) * ab;
    }
    const Vec3 cp = p - c;
    const double d5 = ab.dot(cp);
    const double d6 = ac.dot(cp);
    if (d6 >= 0.0 && d5 <= d6) {
        return c;
    }
    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
        return a + (d2 / (d2 - d6)) * ac;
    }
    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
    }
    const double denom = 1.0 / (va + vb + vc);
    return a + ab * (vb * denom) + ac * (vc * denom);
}

SpatialIndex::SpatialIndex(TriangleMesh mesh) : mesh_(std::move(mesh)) {
    if (mesh_.faces.empty()) {
        throw UsageError("cannot index an empty mesh");
    }
    validate(mesh_);
    closed_ = is_watertight(mesh_);

    const auto n = static_cast<std::uint32_t>(mesh_.faces.size());
    std::vector<BoundingBox> face_boxes(n);
    std::vector<Vec3> centroids(n);
    for (std::uint32_t f = 0; f < n; ++f) {
        for (std::uint32_t idx : mesh_.faces[f]) {
            face_boxes[f].extend(mesh_.vertices[idx]);
        }
        centroids[f] = face_boxes[f].center();
    }
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), 0U);
    nodes_.reserve(2 * (n / kLeafSize + 1));
    build(0, n, face_boxes, centroids);
}

std::uint32_t SpatialIndex::build(std::uint32_t first, std::uint32_t count, std::vector<BoundingBox>& face_boxes,
                                  std::vector<Vec3>& centroids) {
    const auto id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.emplace_back();
    BoundingBox box;
    BoundingBox centroid_box;
    for (std::uint32_t i = first; i < first + count; ++i) {
        box.extend(face_boxes[order_[i]]);
        centroid_box.extend(centroids[order_[i]]);
    }
    nodes_[id].box = box;
    if (count <= kLeafSize) {
        nodes_[id].first = first;
        nodes_[id].count = count;
        return id;
    }
    int axis = 0;
    const Vec3 extent = centroid_box.hi - centroid_box.lo;
    if (extent.y() > extent[axis]) axis = 1;
    if (extent.z() > extent[axis]) axis = 2;
    const std::uint32_t half = count / 2;
    auto begin = order_.begin() + first;
    std::nth_element(begin, begin + half, begin + count, [&](std::uint32_t x, std::uint32_t y) {
        const double cx = centroids[x][axis];
        const double cy = centroids[y][axis];
        return cx < cy || (cx == cy && x < y);
    });
    const std::uint32_t left = build(first, half, face_boxes, centroids);
    const std::uint32_t right = build(first + half, count - half, face_boxes, centroids);
    nodes_[id].first = left;
    nodes_[id].count = 0;
    nodes_[id].right = right;
    return id;
}

std::size_t SpatialIndex::leaf_count() const {
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.count > 0; }));
}

NearestHit SpatialIndex::nearest_point(const Vec3& q) const {
    double best_d2 = std::numeric_limits<double>::infinity();
    std::uint32_t best_face = std::numeric_limits<std::uint32_t>::max();
    Vec3 best_point = Vec3::Zero();

    std::vector<std::uint32_t> stack;
    stack.reserve(64);
    stack.push_back(0);
    while (!stack.empty()) {
        const Node& node = nodes_[stack.back()];
        stack.pop_back();
        // Slack keeps faces tied at the best distance reachable despite rounding.
        if (node.box.squared_distance(q) > best_d2 * (1.0 + 1e-12)) {
            continue;
        }
        if (node.count > 0) {
            for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
                const std::uint32_t f = order_[i];
                const Face& fc = mesh_.faces[f];
                const Vec3 p = closest_point_on_triangle(q, mesh_.vertices[fc[0]], mesh_.vertices[fc[1]],
                                                         mesh_.vertices[fc[2]]);
                const double d2 = (q - p).squaredNorm();
                if (nearest_better(d2, f, best_d2, best_face)) {
                    best_d2 = d2;
                    best_face = f;
                    best_point = p;
                }
            }
            continue;
        }
        // Visit the nearer child first.
        const double dl = nodes_[node.first].box.squared_distance(q);
        const double dr = nodes_[node.right].box.squared_distance(q);
        if (dl <= dr) {
            stack.push_back(node.right);
            stack.push_back(node.first);
        } else {
            stack.push_back(node.first);
            stack.push_back(node.right);
        }
    }
    return {best_point, best_face, std::sqrt(best_d2)};
}

RayHits SpatialIndex::ray_intersections(const Ray& r, double tmin, double tmax) const {
    RayHits out;
    std::vector<std::uint32_t> stack;
    stack.reserve(64);
    stack.push_back(0);
    while (!stack.empty()) {
        const Node& node = nodes_[stack.back()];
        stack.pop_back();
        BoundingBox padded = node.box;
        padded.lo.array() -= kRayBoxPad;
        padded.hi.array() += kRayBoxPad;
        const double pad_t = kRayBoxPad;
        if (!padded.clip(r, tmin - pad_t, tmax + pad_t)) {
            continue;
        }
        if (node.count > 0) {
            for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
                const std::uint32_t f = order_[i];
                const Face& fc = mesh_.faces[f];
                const auto res = intersect_triangle(r, mesh_.vertices[fc[0]], mesh_.vertices[fc[1]],
                                                    mesh_.vertices[fc[2]], tmin, tmax);
                out.grazing = out.grazing || res.grazing;
                if (res.hit) {
                    out.hits.push_back({res.t, f, res.entering});
                }
            }
            continue;
        }
        stack.push_back(node.right);
        stack.push_back(node.first);
    }
    std::sort(out.hits.begin(), out.hits.end(), hit_less);
    return out;
}

std::optional<std::pair<RayHits, Vec3>> SpatialIndex::robust_intersections(const Ray& r, double tmin,
                                                                           double tmax) const {
    for (int attempt = 0; attempt <= kPerturbAttempts; ++attempt) {
        const Ray cast{r.origin, perturbed_direction(r.direction, attempt)};
        RayHits hits = ray_intersections(cast, tmin, tmax);
        if (hits.grazing) {
            continue;
        }
        if (attempt > 0) {
            // The tilted cast only decides which faces are crossed; distances
            // are re-measured along the original ray against each face plane.
            for (RayHit& h : hits.hits) {
                const Face& fc = mesh_.faces[h.face];
                const Vec3& a = mesh_.vertices[fc[0]];
                const Vec3 n = (mesh_.vertices[fc[1]] - a).cross(mesh_.vertices[fc[2]] - a);
                const double denom = n.dot(r.direction);
                if (std::abs(denom) > 1e-3 * n.norm()) {
                    h.distance = n.dot(a - r.origin) / denom;
                }
            }
            std::sort(hits.hits.begin(), hits.hits.end(), hit_less);
        }
        return std::make_pair(std::move(hits), cast.direction);
    }
    return std::nullopt;
}

bool SpatialIndex::is_inside(const Vec3& p) const { return is_inside(p, kParityDirection); }

bool SpatialIndex::is_inside(const Vec3& p, const Vec3& direction) const {
    if (!closed_) {
        throw UsageError("interior query requires closed mesh");
    }
    if (!box().valid() || box().squared_distance(p) > 0.0) {
        return false;
    }
    if (nearest_point(p).distance <= kEdgeTolerance * 1e-3) {
        return false;  // on the surface
    }
    const Ray base = Ray::through(p, direction);
    if (auto clean = robust_intersections(base)) {
        return clean->first.hits.size() % 2 == 1;
    }
    // Every perturbation grazed; fall back to the unperturbed parity.
    return ray_intersections(base).hits.size() % 2 == 1;
}

NearestHit nearest_point_brute(const TriangleMesh& mesh, const Vec3& q) {
    NearestHit best;
    double best_d2 = std::numeric_limits<double>::infinity();
    best.face = std::numeric_limits<std::uint32_t>::max();
    for (std::uint32_t f = 0; f < mesh.faces.size(); ++f) {
        const Face& fc = mesh.faces[f];
        const Vec3 p =
            closest_point_on_triangle(q, mesh.vertices[fc[0]], mesh.vertices[fc[1]], mesh.vertices[fc[2]]);
        const double d2 = (q - p).squaredNorm();
        if (nearest_better(d2, f, best_d2, best.face)) {
            best_d2 = d2;
            best.face = f;
            best.point = p;
        }
    }
    best.distance = std::sqrt(best_d2);
    return best;
}

RayHits ray_intersections_brute(const TriangleMesh& mesh, const Ray& r, double tmin, double tmax) {
    RayHits out;
    for (std::uint32_t f = 0; f < mesh.faces.size(); ++f) {
        const Face& fc = mesh.faces[f];
        const auto res =
            intersect_triangle(r, mesh.vertices[fc[0]], mesh.vertices[fc[1]], mesh.vertices[fc[2]], tmin, tmax);
        out.grazing = out.grazing || res.grazing;
        if (res.hit) {
            out.hits.push_back({res.t, f, res.entering});
        }
    }
    std::sort(out.hits.begin(), out.hits.end(), hit_less);
    return out;
}

Vec3 perturbed_direction(const Vec3& d, int attempt) {
    if (attempt == 0) {
        return d;
    }
    // Perpendicular reference axis, then spin it about d by a golden-angle step
    // so successive attempts tilt in different directions.
    Vec3 ref = std::abs(d.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    Vec3 perp = d.cross(ref).normalized();
    const double spin = attempt * 2.399963229728653;
    perp = Eigen::AngleAxisd(spin, d) * perp;
    return (Eigen::AngleAxisd(attempt * 1e-6, perp) * d).normalized();
}

}  // namespace mandikin
