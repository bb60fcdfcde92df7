#include "mandikin/registration.hpp"

#include "mandikin/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <set>

namespace mandikin {

namespace {

// Collinearity gate: second covariance eigenvalue relative to the largest.
// Planar sets (three markers) keep a zero smallest eigenvalue and are accepted.
constexpr double kCollinearRatio = 1e-9;

constexpr double kGraphResidualChange = 1e-10;
constexpr double kGraphStep = 1e-12;
constexpr int kGraphMaxSweeps = 500;

void check_correspondences(const CorrespondenceSet& c) {
    if (c.source.size() != c.target.size()) {
        throw UsageError("correspondence sets differ in size");
    }
    if (!c.weights.empty() && c.weights.size() != c.source.size()) {
        throw UsageError("weight count does not match correspondence count");
    }
    if (c.source.size() < 3) {
        throw UsageError("rigid fit needs at least 3 correspondences");
    }
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (!c.source[i].allFinite() || !c.target[i].allFinite()) {
            throw UsageError("correspondence " + std::to_string(i) + " is not finite");
        }
        const double w = c.weight(i);
        if (!(w > 0.0) || !std::isfinite(w)) {
            throw UsageError("correspondence weights must be positive");
        }
    }
}

}  // namespace

RigidFit fit_rigid_landmarks(const CorrespondenceSet& c) {
    check_correspondences(c);
    const std::size_t k = c.size();

    double wsum = 0.0;
    Vec3 cs = Vec3::Zero();
    Vec3 ct = Vec3::Zero();
    for (std::size_t i = 0; i < k; ++i) {
        const double w = c.weight(i);
        wsum += w;
        cs += w * c.source[i];
        ct += w * c.target[i];
    }
    cs /= wsum;
    ct /= wsum;

    Mat3 spread = Mat3::Zero();
    Mat3 cross = Mat3::Zero();
    for (std::size_t i = 0; i < k; ++i) {
        const double w = c.weight(i);
        const Vec3 s = c.source[i] - cs;
        const Vec3 t = c.target[i] - ct;
        spread += w * s * s.transpose();
        cross += w * s * t.transpose();
    }

    Eigen::SelfAdjointEigenSolver<Mat3> eig(spread);
    const Vec3 ev = eig.eigenvalues();  // ascending
    if (!(ev(2) > 0.0) || ev(1) < kCollinearRatio * ev(2)) {
        throw NumericError("rank-deficient landmark set");
    }

    Eigen::JacobiSVD<Mat3> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Mat3 u = svd.matrixU();
    const Mat3 v = svd.matrixV();
    Mat3 fix = Mat3::Identity();
    fix(2, 2) = (v * u.transpose()).determinant() < 0.0 ? -1.0 : 1.0;

    RigidFit fit;
    fit.transform.rotation = v * fix * u.transpose();
    fit.transform.translation = ct - fit.transform.rotation * cs;
    fit.rms = rms_residual(c, fit.transform);
    return fit;
}

double rms_residual(const CorrespondenceSet& c, const RigidTransform& t) {
    double wsum = 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        const double w = c.weight(i);
        wsum += w;
        sum += w * (t.apply(c.source[i]) - c.target[i]).squaredNorm();
    }
    return wsum > 0.0 ? std::sqrt(sum / wsum) : 0.0;
}

void IcpParams::check() const {
    if (max_iterations < 1) {
        throw UsageError("ICP needs at least one iteration");
    }
    if (!(convergence_mm > 0.0)) {
        throw UsageError("ICP convergence threshold must be positive");
    }
    if (std::isnan(max_distance_mm)) {
        throw UsageError("ICP distance cutoff is NaN");
    }
    if (!(trim_fraction >= 0.0 && trim_fraction <= 0.5)) {
        throw UsageError("ICP trim fraction must lie in [0, 0.5]");
    }
}

std::vector<NearestHit> closest_pairs(const std::vector<Vec3>& source, const RigidTransform& pose,
                                      const SpatialIndex& target, const Parallel& par) {
    std::vector<NearestHit> out(source.size());
    const auto n = static_cast<std::ptrdiff_t>(source.size());
#pragma omp parallel for schedule(static) num_threads(par.threads())
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        out[i] = target.nearest_point(pose.apply(source[i]));
    }
    return out;
}

std::vector<NearestHit> closest_pairs_reference(const std::vector<Vec3>& source, const RigidTransform& pose,
                                                const SpatialIndex& target) {
    std::vector<NearestHit> out;
    out.reserve(source.size());
    for (const Vec3& p : source) {
        out.push_back(target.nearest_point(pose.apply(p)));
    }
    return out;
}

IcpResult icp(const std::vector<Vec3>& source, const SpatialIndex& target, const RigidTransform& init,
              const IcpParams& params, const Parallel& par) {
    params.check();
    if (source.empty()) {
        throw UsageError("ICP source is empty");
    }
    const bool use_cutoff = params.max_distance_mm > 0.0 && std::isfinite(params.max_distance_mm);

    IcpResult result;
    result.transform = init;
    std::vector<std::size_t> selected;
    for (int iter = 0;; ++iter) {
        const std::vector<NearestHit> pairs = closest_pairs(source, result.transform, target, par);

        selected.clear();
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            if (!use_cutoff || pairs[i].distance <= params.max_distance_mm) {
                selected.push_back(i);
            }
        }
        if (params.trim_fraction > 0.0 && !selected.empty()) {
            std::stable_sort(selected.begin(), selected.end(),
                             [&](std::size_t a, std::size_t b) { return pairs[a].distance < pairs[b].distance; });
            const auto drop = static_cast<std::size_t>(std::floor(params.trim_fraction * selected.size()));
            selected.resize(selected.size() - drop);
            std::sort(selected.begin(), selected.end());
        }
        if (selected.empty()) {
            throw NumericError("no overlap");
        }

        double sum = 0.0;
        for (std::size_t i : selected) {
            sum += pairs[i].distance * pairs[i].distance;
        }
        const double rms = std::sqrt(sum / static_cast<double>(selected.size()));
        result.history.push_back(rms);
        result.rms = rms;
        result.correspondences = selected.size();
        result.iterations = iter;

        if (iter > 0 && std::abs(result.history[iter - 1] - rms) < params.convergence_mm) {
            result.converged = true;
            break;
        }
        if (iter == params.max_iterations) {
            break;
        }

        CorrespondenceSet c;
        c.source.reserve(selected.size());
        c.target.reserve(selected.size());
        for (std::size_t i : selected) {
            c.source.push_back(source[i]);
            c.target.push_back(pairs[i].point);
        }
        if (c.size() < 3) {
            throw NumericError("no overlap");
        }
        result.transform = fit_rigid_landmarks(c).transform;
    }
    return result;
}

IcpResult icp(const TriangleMesh& source, const SpatialIndex& target, const RigidTransform& init,
              const IcpParams& params, const Parallel& par) {
    return icp(source.vertices, target, init, params, par);
}

double graph_residual(const FrameGraph& g, const std::map<std::string, RigidTransform>& t) {
    double total = 0.0;
    for (const auto& e : g.edges) {
        const RigidTransform& tf = t.at(e.from);
        const RigidTransform& tt = t.at(e.to);
        for (std::size_t i = 0; i < e.pairs.size(); ++i) {
            total += e.weight * e.pairs.weight(i) * (tf.apply(e.pairs.source[i]) - tt.apply(e.pairs.target[i])).squaredNorm();
        }
    }
    return total;
}

GraphResult register_graph(const FrameGraph& g) {
    const std::set<std::string> names(g.frames.begin(), g.frames.end());
    if (names.size() != g.frames.size()) {
        throw UsageError("frame names must be unique");
    }
    if (!names.count(g.anchor)) {
        throw UsageError("anchor frame '" + g.anchor + "' is not in the graph");
    }
    double scale = 1.0;
    for (const auto& e : g.edges) {
        if (!names.count(e.from) || !names.count(e.to)) {
            throw UsageError("edge " + e.from + " -> " + e.to + " references an unknown frame");
        }
        if (e.from == e.to) {
            throw UsageError("edge " + e.from + " -> " + e.to + " is a self loop");
        }
        if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
            throw UsageError("edge weights must be positive");
        }
        check_correspondences(e.pairs);
        for (std::size_t i = 0; i < e.pairs.size(); ++i) {
            scale = std::max({scale, e.pairs.source[i].cwiseAbs().maxCoeff(), e.pairs.target[i].cwiseAbs().maxCoeff()});
        }
    }

    // Spanning-tree initialization by breadth-first pairwise fits.
    std::map<std::string, RigidTransform> t;
    t[g.anchor] = RigidTransform::identity();
    std::queue<std::string> pending;
    pending.push(g.anchor);
    while (!pending.empty()) {
        const std::string u = pending.front();
        pending.pop();
        for (const auto& e : g.edges) {
            if (e.to == u && !t.count(e.from)) {
                t[e.from] = compose(t[u], fit_rigid_landmarks(e.pairs).transform);
                pending.push(e.from);
            } else if (e.from == u && !t.count(e.to)) {
                t[e.to] = compose(t[u], invert(fit_rigid_landmarks(e.pairs).transform));
                pending.push(e.to);
            }
        }
    }
    if (t.size() != names.size()) {
        std::string missing;
        for (const auto& f : g.frames) {
            if (!t.count(f)) {
                missing += (missing.empty() ? "" : ", ") + f;
            }
        }
        throw UsageError("frame graph is disconnected; unreachable frames: " + missing);
    }

    GraphResult out;
    double residual = graph_residual(g, t);
    for (int sweep = 1; sweep <= kGraphMaxSweeps; ++sweep) {
        double step = 0.0;
        for (const auto& f : g.frames) {
            if (f == g.anchor) {
                continue;
            }
            CorrespondenceSet c;
            for (const auto& e : g.edges) {
                if (e.from == f) {
                    const RigidTransform& other = t[e.to];
                    for (std::size_t i = 0; i < e.pairs.size(); ++i) {
                        c.source.push_back(e.pairs.source[i]);
                        c.target.push_back(other.apply(e.pairs.target[i]));
                        c.weights.push_back(e.weight * e.pairs.weight(i));
                    }
                } else if (e.to == f) {
                    const RigidTransform& other = t[e.from];
                    for (std::size_t i = 0; i < e.pairs.size(); ++i) {
                        c.source.push_back(e.pairs.target[i]);
                        c.target.push_back(other.apply(e.pairs.source[i]));
                        c.weights.push_back(e.weight * e.pairs.weight(i));
                    }
                }
            }
            const RigidTransform updated = fit_rigid_landmarks(c).transform;
            step = std::max(step, max_corner_deviation(t[f], updated, scale));
            t[f] = updated;
        }
        const double next = graph_residual(g, t);
        const double change = std::abs(residual - next);
        residual = next;
        out.sweeps = sweep;
        if (change < kGraphResidualChange && step < kGraphStep * scale) {
            break;
        }
    }

    out.total_residual = residual;
    for (const auto& e : g.edges) {
        double wsum = 0.0;
        double sum = 0.0;
        for (std::size_t i = 0; i < e.pairs.size(); ++i) {
            const double w = e.pairs.weight(i);
            wsum += w;
            sum += w * (t[e.from].apply(e.pairs.source[i]) - t[e.to].apply(e.pairs.target[i])).squaredNorm();
        }
        out.edge_rms.push_back(std::sqrt(sum / wsum));
    }
    out.transforms = std::move(t);
    return out;
}

RigidTransform align_frames_by_axes(const std::vector<RigidTransform>& motions_f,
                                    const std::vector<RigidTransform>& motions_g) {
    if (motions_f.size() != 3 || motions_g.size() != 3) {
        throw UsageError("axis alignment needs exactly three motions per frame");
    }

    struct FrameAxes {
        Mat3 directions;
        Vec3 anchor_point;  // on axis 1, closest to axis 2
    };
    auto analyse = [](const std::vector<RigidTransform>& motions) {
        std::array<Line3, 3> axes;
        for (int i = 0; i < 3; ++i) {
            const ScrewAxis s = to_screw(motions[i]);
            if (s.angle < kMinAxisAngle) {
                throw NumericError("axis undefined for near-pure translation");
            }
            // to_screw reports angles in [0, pi], so the direction already has
            // the positive-rotation sign.
            axes[i] = s.axis;
        }
        FrameAxes out;
        for (int i = 0; i < 3; ++i) {
            out.directions.col(i) = axes[i].direction;
        }
        const ClosestPoints p01 = closest_points(axes[0], axes[1]);
        const ClosestPoints p02 = closest_points(axes[0], axes[2]);
        const ClosestPoints p12 = closest_points(axes[1], axes[2]);
        if (p01.relation == LineRelation::parallel || p02.relation == LineRelation::parallel ||
            p12.relation == LineRelation::parallel) {
            throw NumericError("degenerate axis configuration");
        }
        if (std::abs(out.directions.determinant()) < kParallelTolerance) {
            throw NumericError("degenerate axis configuration");  // coplanar directions
        }
        out.anchor_point = p01.on_a;
        return out;
    };

    const FrameAxes f = analyse(motions_f);
    const FrameAxes g = analyse(motions_g);

    RigidTransform x;
    try {
        x.rotation = nearest_rotation(f.directions * g.directions.inverse());
    } catch (const NumericError&) {
        throw NumericError("degenerate axis configuration");
    }
    x.translation = f.anchor_point - x.rotation * g.anchor_point;
    return x;
}

}  // namespace mandikin
