#pragma once

#include "mandikin/geom.hpp"
#include "mandikin/mesh.hpp"
#include "mandikin/parallel.hpp"

#include <map>
#include <string>
#include <vector>

namespace mandikin {

/// Paired points: source[i] should map onto target[i]. Weights optional
/// (empty means all ones).
struct CorrespondenceSet {
    std::vector<Vec3> source;
    std::vector<Vec3> target;
    std::vector<double> weights;

    std::size_t size() const { return source.size(); }
    double weight(std::size_t i) const { return weights.empty() ? 1.0 : weights[i]; }
};

struct RigidFit {
    RigidTransform transform;
    double rms = 0.0;  // weighted RMS residual, mm
};

/// Weighted least-squares rigid alignment of source onto target (SVD of the
/// cross-covariance with det correction). Throws UsageError for fewer than 3
/// pairs, mismatched sizes or non-positive weights, NumericError("rank-deficient
/// landmark set") for collinear sources.
RigidFit fit_rigid_landmarks(const CorrespondenceSet& c);

/// Weighted RMS of |t(source) - target|.
double rms_residual(const CorrespondenceSet& c, const RigidTransform& t);

struct IcpParams {
    int max_iterations = 100;
    double convergence_mm = 1e-9;   // stop when the RMS change drops below this
    double max_distance_mm = 10.0;  // pairs farther apart are rejected; <= 0 or inf disables
    double trim_fraction = 0.0;     // worst fraction of pairs dropped each iteration, [0, 0.5]

    void check() const;
};

struct IcpResult {
    RigidTransform transform;
    double rms = 0.0;
    std::vector<double> history;  // RMS of the pairs used, per iteration (index 0 = initial pose)
    std::size_t correspondences = 0;
    int iterations = 0;
    bool converged = false;
};

/// Point-to-point ICP of `source` (points in their own frame) against the
/// indexed target surface. Throws NumericError("no overlap") when no pair
/// survives rejection.
IcpResult icp(const std::vector<Vec3>& source, const SpatialIndex& target, const RigidTransform& init,
              const IcpParams& params, const Parallel& par = {});
IcpResult icp(const TriangleMesh& source, const SpatialIndex& target, const RigidTransform& init,
              const IcpParams& params, const Parallel& par = {});

/// Closest target point for every transformed source point.
/// OpenMP kernel and its serial reference; results are bitwise identical.
std::vector<NearestHit> closest_pairs(const std::vector<Vec3>& source, const RigidTransform& pose,
                                      const SpatialIndex& target, const Parallel& par = {});
std::vector<NearestHit> closest_pairs_reference(const std::vector<Vec3>& source, const RigidTransform& pose,
                                                const SpatialIndex& target);

/// Named coordinate frames linked by correspondence sets. An edge's source
/// points are expressed in `from`, its target points in `to`.
struct FrameGraph {
    struct Edge {
        std::string from;
        std::string to;
        CorrespondenceSet pairs;
        double weight = 1.0;
    };
    std::vector<std::string> frames;
    std::vector<Edge> edges;
    std::string anchor;
};

struct GraphResult {
    std::map<std::string, RigidTransform> transforms;  // frame -> anchor
    std::vector<double> edge_rms;                      // per edge, in edge order
    double total_residual = 0.0;                       // weighted sum of squares
    int sweeps = 0;
};

/// Joint registration of all frames into the anchor frame by alternating
/// per-frame Procrustes updates. Throws UsageError listing unreachable frames
/// for disconnected graphs.
GraphResult register_graph(const FrameGraph& g);

/// Weighted sum of squared residuals of `g` under frame transforms `t`.
double graph_residual(const FrameGraph& g, const std::map<std::string, RigidTransform>& t);

/// Minimum rotation angle for a motion's screw axis to count as defined.
inline constexpr double kMinAxisAngle = 1e-3;

/// Frame transform mapping G coordinates to F coordinates from three rigid
/// motions observed in both frames (same order). Throws
/// NumericError("degenerate axis configuration") for parallel axes and
/// NumericError("axis undefined for near-pure translation") for motions
/// rotating less than kMinAxisAngle.
RigidTransform align_frames_by_axes(const std::vector<RigidTransform>& motions_f,
                                    const std::vector<RigidTransform>& motions_g);

}  // namespace mandikin
