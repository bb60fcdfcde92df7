#pragma once

#include "mandikin/geom.hpp"
#include "mandikin/mesh.hpp"
#include "mandikin/parallel.hpp"

#include <array>
#include <vector>

namespace mandikin {

/// Three labelled points of a rigid marker (one per bow).
struct MarkerTriangle {
    std::array<Vec3, 3> points;

    double area() const;
    double max_edge_mismatch(const MarkerTriangle& other) const;
    MarkerTriangle transformed(const RigidTransform& t) const;
};

struct MotionSample {
    double time = 0.0;  // s
    MarkerTriangle upper;
    MarkerTriangle lower;
};

struct MotionSequence {
    std::vector<MotionSample> samples;
    double nominal_rate_hz = 0.0;  // metadata

    /// Throws UsageError unless non-empty with finite, non-negative, strictly increasing times.
    void check() const;
};

/// Lower-jaw pose per frame, expressed in the stabilized upper frame.
struct RelativeMotion {
    std::vector<double> times;
    std::vector<RigidTransform> transforms;

    std::size_t size() const { return times.size(); }
};

inline constexpr double kMinMarkerArea = 1e-6;          // mm^2
inline constexpr double kMarkerEdgeTolerance = 0.5;     // mm

/// Least-squares pose taking `reference` onto `current`. Throws
/// NumericError("marker deformation exceeds tolerance") when edge lengths
/// differ by more than 0.5 mm, NumericError for collinear markers.
RigidTransform triangle_pose(const MarkerTriangle& reference, const MarkerTriangle& current);

/// Re-expresses every sample so its upper marker sits where the reference
/// sample's upper marker is.
MotionSequence stabilize(const MotionSequence& seq, std::size_t reference = 0, const Parallel& par = {});

/// Per-frame pose of the lower marker relative to the upper one, normalized so
/// the reference sample is the identity; expressed in the reference sample's
/// coordinates.
RelativeMotion relative_motion(const MotionSequence& seq, std::size_t reference = 0);

/// Resamples at `rate_hz` from the first timestamp; translation linear,
/// rotation geodesic. Throws UsageError for fewer than two frames.
RelativeMotion resample(const RelativeMotion& rm, double rate_hz);

/// Conjugates a relative motion into another frame: x maps the motion's frame
/// into the target frame, so each transform becomes x * m * x^-1.
RelativeMotion change_frame(const RelativeMotion& rm, const RigidTransform& x);

/// Meshes for the selected frames (all frames when `frames` is empty).
/// Throws UsageError for an out-of-range frame index.
std::vector<TriangleMesh> apply_motion(const TriangleMesh& mesh, const RelativeMotion& rm,
                                       const std::vector<std::size_t>& frames = {}, const Parallel& par = {});

}  // namespace mandikin
