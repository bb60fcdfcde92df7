#pragma once

#include "mandikin/geom.hpp"
#include "mandikin/mesh.hpp"
#include "mandikin/motion.hpp"
#include "mandikin/parallel.hpp"
#include "mandikin/radiograph.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace mandikin::synth {

/// Closed axis-aligned box, faces subdivided so no edge exceeds `max_edge`.
TriangleMesh make_box(const Vec3& lo, const Vec3& hi, double max_edge);
/// Closed icosphere after `level` subdivisions (20 * 4^level faces).
TriangleMesh make_icosphere(const Vec3& center, double radius, int level);
/// Smallest subdivision level whose edges are no longer than `max_edge` (capped at 8).
int icosphere_level(double radius, double max_edge);

/// Anatomy frame: x lateral (left to right), y anterior, z superior.
struct PhantomSpec {
    std::uint64_t seed = 1;
    double resolution_mm = 1.0;  // target edge length
    bool maxilla = true;
    bool mandible = true;
    bool condyles = true;  // condylar spheres, part of the mandible mesh
    bool bow_spheres = false;
    double occlusal_gap_mm = 0.4;
    double voxel_mm = 0.0;  // > 0 adds a rasterized volume
    double mu = 0.02;       // attenuation of both bodies in the volume, per mm

    void check() const;
};

struct Phantom {
    TriangleMesh maxilla;
    TriangleMesh mandible;
    TriangleMesh upper_bow;  // spheres at the upper marker points (when requested)
    TriangleMesh lower_bow;
    MarkerTriangle upper_marker;  // rigidly attached to the maxilla
    MarkerTriangle lower_marker;  // rigidly attached to the mandible
    std::array<Vec3, 2> condyles;
    double condyle_radius = 5.0;
    Line3 condylar_axis;  // through both condyle centres, direction +x
    Vec3 incisal_point;   // front centre of the mandible's occlusal face
    std::optional<VoxelVolume> volume;
};

/// Deterministic for a fixed spec; all meshes watertight.
Phantom make_phantom(const PhantomSpec& spec, const Parallel& par = {});

enum class Primitive { opening, protrusion, lateral };

/// Moves one channel smoothly from its current value to `target` (degrees for
/// opening, mm otherwise) over `duration_s`; other channels hold.
struct MotionSegment {
    Primitive kind = Primitive::opening;
    double target = 0.0;
    double duration_s = 1.0;
};

struct MotionScript {
    std::vector<MotionSegment> segments;
    double rate_hz = 75.0;

    double duration() const;
    /// Throws UsageError for non-positive durations or rates, or openings beyond 45 degrees.
    void check() const;
};

/// "opening:20:1,protrusion:5:0.5" -> segments of kind:target:duration.
MotionScript parse_motion_script(std::string_view text, double rate_hz = 75.0);

/// Mandible pose in the anatomy frame at time t: translation (lateral, protrusion)
/// after rotation by minus the opening angle about the condylar axis.
RigidTransform script_pose(const MotionScript& script, const Line3& condylar_axis, double t);

struct MotionOptions {
    double noise_sigma_mm = 0.0;
    std::uint64_t seed = 1;
    bool head_motion = false;
    /// Maps anatomy coordinates into the tracking device's coordinates.
    RigidTransform device_frame = RigidTransform::identity();
};

struct MotionData {
    RelativeMotion truth;                // anatomy frame, identity at t = 0
    MotionSequence clean;                // marker stream in device coordinates
    std::optional<MotionSequence> noisy; // present when noise_sigma_mm > 0
};

MotionData make_motion(const MotionScript& script, const Phantom& phantom, const MotionOptions& options = {});

/// Smooth head motion, identity at t = 0.
RigidTransform head_pose(std::uint64_t seed, double t);

/// Three mandible poses in the anatomy frame whose screw axes are well separated
/// (roughly along x, y and z, 20-30 degrees each).
std::vector<RigidTransform> calibration_motions(const Phantom& phantom, std::uint64_t seed);

/// The same motions as the device records them: one row per motion, derived
/// from (optionally noisy) marker triangles.
RelativeMotion observe_calibration(const Phantom& phantom, const std::vector<RigidTransform>& motions,
                                   const MotionOptions& options);

}  // namespace mandikin::synth
