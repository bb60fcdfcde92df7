#pragma once

#include "mandikin/geom.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

namespace mandikin {

using Face = std::array<std::uint32_t, 3>;

/// Indexed triangle mesh in millimetres. Faces are counter-clockwise seen from
/// outside, so closed meshes have outward normals.
struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<Face> faces;
    std::vector<Vec3> normals;  // optional, empty or one per vertex

    bool empty() const { return faces.empty(); }
    double face_area(std::size_t f) const;
    Vec3 face_normal(std::size_t f) const;  // unit, zero for degenerate faces
    double surface_area() const;
    /// Signed enclosed volume (positive for outward-oriented closed meshes).
    double signed_volume() const;
};

inline constexpr double kDegenerateArea = 1e-12;  // mm^2

/// Throws IoError on out-of-range indices, non-finite coordinates,
/// degenerate faces or a normals array of the wrong size.
void validate(const TriangleMesh& mesh);

/// Every undirected edge is used by exactly two faces, once in each direction.
bool is_watertight(const TriangleMesh& mesh);

/// Applies `t` to every vertex (and rotates normals). Identity returns an exact copy.
TriangleMesh transform_mesh(const TriangleMesh& mesh, const RigidTransform& t);

/// Concatenates meshes into one, reindexing faces.
TriangleMesh merge(const std::vector<TriangleMesh>& parts);

struct Ray {
    Vec3 origin = Vec3::Zero();
    Vec3 direction = Vec3::UnitZ();

    /// Normalizes `direction`.
    static Ray through(const Vec3& origin, const Vec3& direction);
    Vec3 at(double t) const { return origin + t * direction; }
};

struct NearestHit {
    Vec3 point;
    std::uint32_t face = 0;
    double distance = std::numeric_limits<double>::infinity();
};

struct RayHit {
    double distance;  // along the ray, mm
    std::uint32_t face;
    bool entering;    // ray direction opposes the face normal
};

/// Hits sorted by (distance, face). `grazing` is set when any accepted or
/// near-miss hit lies within 1e-9 mm of a triangle edge, or the ray is
/// coplanar with a face it passes near.
struct RayHits {
    std::vector<RayHit> hits;
    bool grazing = false;
};

inline constexpr double kEdgeTolerance = 1e-9;  // mm

struct BoundingBox {
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());

    void extend(const Vec3& p) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    void extend(const BoundingBox& b) {
        lo = lo.cwiseMin(b.lo);
        hi = hi.cwiseMax(b.hi);
    }
    bool valid() const { return (lo.array() <= hi.array()).all(); }
    Vec3 center() const { return 0.5 * (lo + hi); }
    double squared_distance(const Vec3& p) const;
    /// Slab test; returns the parameter interval clipped to [tmin, tmax] or nothing.
    std::optional<std::pair<double, double>> clip(const Ray& r, double tmin, double tmax) const;
};

BoundingBox bounds(const TriangleMesh& mesh);

/// Closest point on triangle (a, b, c) to p.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

/// Bounding-volume hierarchy over the faces of one mesh. Holds its own copy of
/// the mesh; immutable and safe for concurrent queries once built.
class SpatialIndex {
public:
    /// Throws UsageError for an empty mesh, IoError for an invalid one.
    explicit SpatialIndex(TriangleMesh mesh);

    const TriangleMesh& mesh() const { return mesh_; }
    bool closed() const { return closed_; }
    std::size_t leaf_count() const;
    const BoundingBox& box() const { return nodes_.front().box; }

    NearestHit nearest_point(const Vec3& q) const;
    /// Crossings with distance in [tmin, tmax].
    RayHits ray_intersections(const Ray& r, double tmin = 0.0,
                              double tmax = std::numeric_limits<double>::infinity()) const;
    /// Parity test for closed meshes; throws UsageError("interior query requires
    /// closed mesh") otherwise. Points on the surface are not inside.
    bool is_inside(const Vec3& p) const;
    /// Parity test along a caller-chosen direction (perturbed on grazing hits).
    bool is_inside(const Vec3& p, const Vec3& direction) const;
    /// Ray crossings with the grazing rule applied: grazing casts are retried
    /// with deterministic 1e-6 rad perturbations of the direction. Returns the
    /// faces crossed by the first clean cast, with distances measured along the
    /// original ray, and the direction used; nothing when all retries graze.
    std::optional<std::pair<RayHits, Vec3>> robust_intersections(const Ray& r, double tmin = 0.0,
                                                                 double tmax = std::numeric_limits<double>::infinity()) const;

private:
    struct Node {
        BoundingBox box;
        std::uint32_t first = 0;  // leaf: first index into order_; inner: left child
        std::uint32_t count = 0;  // leaf: face count; inner: 0
        std::uint32_t right = 0;
    };

    std::uint32_t build(std::uint32_t first, std::uint32_t count, std::vector<BoundingBox>& face_boxes,
                        std::vector<Vec3>& centroids);

    TriangleMesh mesh_;
    std::vector<Node> nodes_;
    std::vector<std::uint32_t> order_;
    bool closed_ = false;
};

/// Exhaustive reference implementations of the index queries.
NearestHit nearest_point_brute(const TriangleMesh& mesh, const Vec3& q);
RayHits ray_intersections_brute(const TriangleMesh& mesh, const Ray& r, double tmin = 0.0,
                                double tmax = std::numeric_limits<double>::infinity());

/// Deterministic perturbation of a unit direction by `attempt` * 1e-6 rad.
Vec3 perturbed_direction(const Vec3& d, int attempt);

}  // namespace mandikin
