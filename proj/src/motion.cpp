#include "mandikin/motion.hpp"

#include "mandikin/error.hpp"
#include "mandikin/registration.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mandikin {

double MarkerTriangle::area() const {
    return 0.5 * (points[1] - points[0]).cross(points[2] - points[0]).norm();
}

double MarkerTriangle::max_edge_mismatch(const MarkerTriangle& other) const {
    double worst = 0.0;
    for (int i = 0; i < 3; ++i) {
        const int j = (i + 1) % 3;
        const double a = (points[j] - points[i]).norm();
        const double b = (other.points[j] - other.points[i]).norm();
        worst = std::max(worst, std::abs(a - b));
    }
    return worst;
}

MarkerTriangle MarkerTriangle::transformed(const RigidTransform& t) const {
    return {{t.apply(points[0]), t.apply(points[1]), t.apply(points[2])}};
}

void MotionSequence::check() const {
    if (samples.empty()) {
        throw UsageError("motion sequence is empty");
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double t = samples[i].time;
        if (!std::isfinite(t) || t < 0.0) {
            throw UsageError("sample " + std::to_string(i) + " has an invalid timestamp");
        }
        if (i > 0 && !(t > samples[i - 1].time)) {
            throw UsageError("timestamps must be strictly increasing (sample " + std::to_string(i) + ")");
        }
    }
}

RigidTransform triangle_pose(const MarkerTriangle& reference, const MarkerTriangle& current) {
    if (reference.area() <= kMinMarkerArea || current.area() <= kMinMarkerArea) {
        throw NumericError("marker triangle is collinear");
    }
    if (reference.max_edge_mismatch(current) > kMarkerEdgeTolerance) {
        throw NumericError("marker deformation exceeds tolerance");
    }
    CorrespondenceSet c;
    c.source.assign(reference.points.begin(), reference.points.end());
    c.target.assign(current.points.begin(), current.points.end());
    return fit_rigid_landmarks(c).transform;
}

MotionSequence stabilize(const MotionSequence& seq, std::size_t reference, const Parallel& par) {
    seq.check();
    if (reference >= seq.samples.size()) {
        throw UsageError("reference sample index out of range");
    }
    MotionSequence out = seq;
    const MarkerTriangle& ref = seq.samples[reference].upper;
    const auto n = static_cast<std::ptrdiff_t>(seq.samples.size());
    // Exceptions cannot cross the OpenMP region; collect the first failure.
    std::vector<std::string> errors(seq.samples.size());
#pragma omp parallel for schedule(static) num_threads(par.threads())
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
            const RigidTransform back = invert(triangle_pose(ref, seq.samples[i].upper));
            out.samples[i].upper = seq.samples[i].upper.transformed(back);
            out.samples[i].lower = seq.samples[i].lower.transformed(back);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    }
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!errors[i].empty()) {
            throw NumericError(errors[i] + " (sample " + std::to_string(i) + ")");
        }
    }
    return out;
}

RelativeMotion relative_motion(const MotionSequence& seq, std::size_t reference) {
    seq.check();
    if (reference >= seq.samples.size()) {
        throw UsageError("reference sample index out of range");
    }
    const MotionSample& ref = seq.samples[reference];
    RelativeMotion rm;
    rm.times.reserve(seq.samples.size());
    rm.transforms.reserve(seq.samples.size());
    for (std::size_t i = 0; i < seq.samples.size(); ++i) {
        const MotionSample& s = seq.samples[i];
        rm.times.push_back(s.time);
        if (i == reference) {
            rm.transforms.push_back(RigidTransform::identity());
            continue;
        }
        try {
            const RigidTransform upper = triangle_pose(ref.upper, s.upper);
            const RigidTransform lower = triangle_pose(ref.lower, s.lower);
            rm.transforms.push_back(compose(invert(upper), lower));
        } catch (const NumericError& e) {
            throw NumericError(std::string(e.what()) + " (sample " + std::to_string(i) + ")");
        }
    }
    return rm;
}

RelativeMotion resample(const RelativeMotion& rm, double rate_hz) {
    if (rm.size() < 2) {
        throw UsageError("resampling needs at least two frames");
    }
    if (!(rate_hz > 0.0) || !std::isfinite(rate_hz)) {
        throw UsageError("resampling rate must be positive");
    }
    const double t0 = rm.times.front();
    const double t1 = rm.times.back();
    const auto count = static_cast<std::size_t>(std::floor((t1 - t0) * rate_hz + 1e-9)) + 1;

    RelativeMotion out;
    out.times.reserve(count);
    out.transforms.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        double t = t0 + static_cast<double>(k) / rate_hz;
        if (k == 0) {
            out.times.push_back(t0);
            out.transforms.push_back(rm.transforms.front());
            continue;
        }
        if (std::abs(t - t1) <= 1e-9 * std::max(1.0, std::abs(t1))) {
            out.times.push_back(t1);
            out.transforms.push_back(rm.transforms.back());
            continue;
        }
        const auto upper = std::upper_bound(rm.times.begin(), rm.times.end(), t);
        const std::size_t j = std::min<std::size_t>(std::max<std::ptrdiff_t>(upper - rm.times.begin(), 1) - 1,
                                                    rm.size() - 2);
        const double fraction = std::clamp((t - rm.times[j]) / (rm.times[j + 1] - rm.times[j]), 0.0, 1.0);
        out.times.push_back(t);
        out.transforms.push_back(interpolate(rm.transforms[j], rm.transforms[j + 1], fraction));
    }
    return out;
}

RelativeMotion change_frame(const RelativeMotion& rm, const RigidTransform& x) {
    RelativeMotion out;
    out.times = rm.times;
    const RigidTransform x_inv = invert(x);
    out.transforms.reserve(rm.size());
    for (const auto& m : rm.transforms) {
        out.transforms.push_back(compose(x, compose(m, x_inv)));
    }
    return out;
}

std::vector<TriangleMesh> apply_motion(const TriangleMesh& mesh, const RelativeMotion& rm,
                                       const std::vector<std::size_t>& frames, const Parallel& par) {
    std::vector<std::size_t> selected = frames;
    if (selected.empty()) {
        selected.resize(rm.size());
        for (std::size_t i = 0; i < selected.size(); ++i) {
            selected[i] = i;
        }
    }
    for (std::size_t f : selected) {
        if (f >= rm.size()) {
            throw UsageError("frame index " + std::to_string(f) + " out of range (" + std::to_string(rm.size()) +
                             " frames)");
        }
    }
    std::vector<TriangleMesh> out(selected.size());
    const auto n = static_cast<std::ptrdiff_t>(selected.size());
#pragma omp parallel for schedule(static) num_threads(par.threads())
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        out[i] = transform_mesh(mesh, rm.transforms[selected[i]]);
    }
    return out;
}

}  // namespace mandikin
