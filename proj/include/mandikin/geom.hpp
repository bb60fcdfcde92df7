#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <span>

namespace mandikin {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Proper rigid motion x -> rotation * x + translation (millimetres).
struct RigidTransform {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    static RigidTransform identity() { return {}; }
    static RigidTransform from_translation(const Vec3& t) { return {Mat3::Identity(), t}; }
    static RigidTransform from_rotation(const Mat3& r) { return {r, Vec3::Zero()}; }
    /// Rotation by `angle` radians about the line through `point` with direction `axis`.
    static RigidTransform rotation_about(const Vec3& axis, double angle, const Vec3& point = Vec3::Zero());

    Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
    Vec3 apply_direction(const Vec3& d) const { return rotation * d; }

    bool is_exact_identity() const;
};

/// Orthonormality and det=+1 within `tol`.
bool is_valid(const RigidTransform& t, double tol = 1e-9);

/// Result maps p to a(b(p)).
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform invert(const RigidTransform& t);

inline Vec3 apply_point(const RigidTransform& t, const Vec3& p) { return t.apply(p); }

inline RigidTransform operator*(const RigidTransform& a, const RigidTransform& b) { return compose(a, b); }

struct Line3 {
    Vec3 point = Vec3::Zero();
    Vec3 direction = Vec3::UnitZ();

    /// Normalizes `direction`; throws NumericError for a zero direction.
    static Line3 through(const Vec3& point, const Vec3& direction);
    Vec3 at(double t) const { return point + t * direction; }
};

/// Rotation by `angle` about `axis` followed by `slide` mm along the axis direction.
struct ScrewAxis {
    Line3 axis;
    double angle = 0.0;  // radians, (-pi, pi]
    double slide = 0.0;  // mm
};

/// Screw decomposition. Axis point is the point of the axis closest to the origin.
/// Identity gives angle 0, slide 0, direction +z through the origin; a pure
/// translation gives angle 0 with the axis along the translation.
ScrewAxis to_screw(const RigidTransform& t);
RigidTransform from_screw(const ScrewAxis& s);

enum class LineRelation { intersecting, skew, parallel };

struct ClosestPoints {
    Vec3 on_a;
    Vec3 on_b;
    LineRelation relation;
};

inline constexpr double kParallelTolerance = 1e-9;   // |cross| of unit directions
inline constexpr double kIntersectTolerance = 1e-9;  // mm between closest points

/// For parallel lines the returned points are a's anchor point and its
/// projection on b; callers doing registration must reject that case.
ClosestPoints closest_points(const Line3& a, const Line3& b);

/// Orthonormal det=+1 polar factor nearest to `m` in Frobenius norm.
/// Throws NumericError("degenerate direction matrix") for singular or
/// reflection-dominant input.
Mat3 nearest_rotation(const Mat3& m);

/// Geodesic interpolation: translation linear, rotation along the shortest arc.
RigidTransform interpolate(const RigidTransform& a, const RigidTransform& b, double fraction);

/// Rotation angle in [0, pi] (geodesic distance to identity).
double rotation_angle(const Mat3& r);

/// Largest displacement of the eight corners of the cube [-h, h]^3 between two transforms.
double max_corner_deviation(const RigidTransform& a, const RigidTransform& b, double half_side = 1.0);

}  // namespace mandikin
