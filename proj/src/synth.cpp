#include "mandikin/synth.hpp"

#include "mandikin/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <string>

namespace mandikin::synth {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double smoothstep(double u) {
    u = std::clamp(u, 0.0, 1.0);
    return u * u * (3.0 - 2.0 * u);
}

Vec3 unit_or(const Vec3& v, const Vec3& fallback) {
    const double n = v.norm();
    return n > 0.0 ? Vec3(v / n) : fallback;
}

}  // namespace

// ---------------------------------------------------------------- meshes

TriangleMesh make_box(const Vec3& lo, const Vec3& hi, double max_edge) {
    if (!((hi - lo).array() > 0.0).all() || !(max_edge > 0.0)) {
        throw UsageError("box needs positive extent and edge length");
    }
    std::array<long, 3> n{};
    for (int a = 0; a < 3; ++a) {
        n[a] = std::max(1L, static_cast<long>(std::ceil((hi[a] - lo[a]) / max_edge - 1e-9)));
    }
    TriangleMesh mesh;
    std::map<std::array<long, 3>, std::uint32_t> ids;
    auto vertex = [&](std::array<long, 3> g) {
        const auto [it, inserted] = ids.try_emplace(g, static_cast<std::uint32_t>(mesh.vertices.size()));
        if (inserted) {
            Vec3 p;
            for (int a = 0; a < 3; ++a) {
                // Exact end values on the box faces.
                p[a] = g[a] == n[a] ? hi[a] : lo[a] + (hi[a] - lo[a]) * static_cast<double>(g[a]) / static_cast<double>(n[a]);
            }
            mesh.vertices.push_back(p);
        }
        return it->second;
    };
    for (int a = 0; a < 3; ++a) {
        const int b = (a + 1) % 3;
        const int c = (a + 2) % 3;
        for (int side = 0; side < 2; ++side) {
            for (long u = 0; u < n[b]; ++u) {
                for (long v = 0; v < n[c]; ++v) {
                    auto at = [&](long du, long dv) {
                        std::array<long, 3> g{};
                        g[a] = side ? n[a] : 0;
                        g[b] = u + du;
                        g[c] = v + dv;
                        return vertex(g);
                    };
                    // (b, c, a) is right-handed, so counter-clockwise in (b, c) faces +a.
                    std::array<std::uint32_t, 4> q{at(0, 0), at(1, 0), at(1, 1), at(0, 1)};
                    if (!side) std::swap(q[1], q[3]);
                    mesh.faces.push_back({q[0], q[1], q[2]});
                    mesh.faces.push_back({q[0], q[2], q[3]});
                }
            }
        }
    }
    return mesh;
}

TriangleMesh make_icosphere(const Vec3& center, double radius, int level) {
    if (!(radius > 0.0) || level < 0 || level > 9) {
        throw UsageError("icosphere needs a positive radius and level 0..9");
    }
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> dirs = {{-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
                              {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
                              {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
    for (Vec3& d : dirs) d.normalize();
    std::vector<Face> faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                               {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                               {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                               {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    for (int l = 0; l < level; ++l) {
        std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> mid;
        auto midpoint = [&](std::uint32_t i, std::uint32_t j) {
            const auto key = std::minmax(i, j);
            const auto [it, inserted] = mid.try_emplace({key.first, key.second}, static_cast<std::uint32_t>(dirs.size()));
            if (inserted) dirs.push_back((dirs[i] + dirs[j]).normalized());
            return it->second;
        };
        std::vector<Face> next;
        next.reserve(faces.size() * 4);
        for (const Face& f : faces) {
            const std::uint32_t a = midpoint(f[0], f[1]);
            const std::uint32_t b = midpoint(f[1], f[2]);
            const std::uint32_t c = midpoint(f[2], f[0]);
            next.push_back({f[0], a, c});
            next.push_back({f[1], b, a});
            next.push_back({f[2], c, b});
            next.push_back({a, b, c});
        }
        faces.swap(next);
    }
    TriangleMesh mesh;
    mesh.vertices.reserve(dirs.size());
    for (const Vec3& d : dirs) mesh.vertices.push_back(center + radius * d);
    mesh.faces = std::move(faces);
    return mesh;
}

int icosphere_level(double radius, double max_edge) {
    if (!(radius > 0.0) || !(max_edge > 0.0)) {
        throw UsageError("icosphere needs a positive radius and edge length");
    }
    // Icosahedron edge for unit circumradius; subdivision roughly halves it.
    double edge = 1.0514622242382672 * radius;
    int level = 0;
    while (edge > max_edge && level < 8) {
        edge *= 0.5;
        ++level;
    }
    return level;
}

// ---------------------------------------------------------------- phantom

void PhantomSpec::check() const {
    if (!(resolution_mm > 0.0) || !std::isfinite(resolution_mm)) {
        throw UsageError("phantom resolution must be positive");
    }
    if (!(occlusal_gap_mm >= 0.0) || occlusal_gap_mm > 10.0) {
        throw UsageError("occlusal gap must be within [0, 10] mm");
    }
    if (!(voxel_mm >= 0.0) || !std::isfinite(voxel_mm)) {
        throw UsageError("voxel size must be non-negative");
    }
    if (!(mu >= 0.0) || !std::isfinite(mu)) {
        throw UsageError("attenuation must be non-negative");
    }
}

Phantom make_phantom(const PhantomSpec& spec, const Parallel& par) {
    spec.check();
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> jitter(-2.0, 2.0);
    auto jittered = [&](const Vec3& p) { return Vec3(p.x() + jitter(rng), p.y() + jitter(rng), p.z() + jitter(rng)); };

    Phantom ph;
    const double half_gap = 0.5 * spec.occlusal_gap_mm;
    ph.condyles = {Vec3(-40.0, -10.0, 10.0), Vec3(40.0, -10.0, 10.0)};
    ph.condylar_axis = Line3::through(ph.condyles[0], ph.condyles[1] - ph.condyles[0]);
    ph.incisal_point = Vec3(0.0, 50.0, -half_gap);

    if (spec.maxilla) {
        ph.maxilla = make_box(Vec3(-25.0, 0.0, half_gap), Vec3(25.0, 50.0, 20.0), spec.resolution_mm);
    }
    if (spec.mandible) {
        std::vector<TriangleMesh> parts{make_box(Vec3(-25.0, 0.0, -20.0), Vec3(25.0, 50.0, -half_gap), spec.resolution_mm)};
        if (spec.condyles) {
            const int level = icosphere_level(ph.condyle_radius, spec.resolution_mm);
            for (const Vec3& c : ph.condyles) parts.push_back(make_icosphere(c, ph.condyle_radius, level));
        }
        ph.mandible = merge(parts);
    }

    ph.upper_marker.points = {jittered({-30.0, 90.0, 10.0}), jittered({30.0, 90.0, 10.0}), jittered({0.0, 90.0, 40.0})};
    ph.lower_marker.points = {jittered({-30.0, 90.0, -10.0}), jittered({30.0, 90.0, -10.0}), jittered({0.0, 90.0, -40.0})};

    if (spec.bow_spheres) {
        const double r = 3.0;
        const int level = icosphere_level(r, spec.resolution_mm);
        std::vector<TriangleMesh> upper, lower;
        for (const Vec3& p : ph.upper_marker.points) upper.push_back(make_icosphere(p, r, level));
        for (const Vec3& p : ph.lower_marker.points) lower.push_back(make_icosphere(p, r, level));
        ph.upper_bow = merge(upper);
        ph.lower_bow = merge(lower);
    }

    if (spec.voxel_mm > 0.0 && (spec.maxilla || spec.mandible)) {
        BoundingBox box;
        for (const TriangleMesh* m : {&ph.maxilla, &ph.mandible}) {
            for (const Vec3& v : m->vertices) box.extend(v);
        }
        const double s = spec.voxel_mm;
        // Voxel faces on multiples of s keep centres off the integer-aligned
        // box faces, which would otherwise rasterize as outside.
        Vec3 origin;
        std::array<std::size_t, 3> dims{};
        for (int a = 0; a < 3; ++a) {
            const double first = std::floor(box.lo[a] / s) - 2.0;
            const double last = std::ceil(box.hi[a] / s) + 2.0;
            origin[a] = (first + 0.5) * s;
            dims[a] = static_cast<std::size_t>(last - first);
        }
        VoxelVolume v = VoxelVolume::filled(dims, Vec3::Constant(s), origin);
        for (const TriangleMesh* m : {&ph.maxilla, &ph.mandible}) {
            if (!m->empty()) rasterize(v, SpatialIndex(*m), spec.mu, par);
        }
        ph.volume = std::move(v);
    }
    return ph;
}

// ---------------------------------------------------------------- motion

double MotionScript::duration() const {
    double d = 0.0;
    for (const MotionSegment& s : segments) d += s.duration_s;
    return d;
}

void MotionScript::check() const {
    if (!(rate_hz > 0.0) || !std::isfinite(rate_hz)) {
        throw UsageError("sample rate must be positive");
    }
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const MotionSegment& s = segments[i];
        if (!(s.duration_s > 0.0) || !std::isfinite(s.duration_s)) {
            throw UsageError("segment " + std::to_string(i) + ": duration must be positive");
        }
        if (!std::isfinite(s.target)) {
            throw UsageError("segment " + std::to_string(i) + ": target must be finite");
        }
        if (s.kind == Primitive::opening && std::abs(s.target) > 45.0) {
            throw UsageError("segment " + std::to_string(i) + ": opening angle must be within +-45 degrees");
        }
    }
}

MotionScript parse_motion_script(std::string_view text, double rate_hz) {
    MotionScript script;
    script.rate_hz = rate_hz;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find(',', start);
        if (end == std::string_view::npos) end = text.size();
        const std::string item(text.substr(start, end - start));
        start = end + 1;
        if (item.empty()) {
            if (end == text.size()) break;
            throw UsageError("empty motion segment");
        }
        const auto c1 = item.find(':');
        const auto c2 = c1 == std::string::npos ? std::string::npos : item.find(':', c1 + 1);
        if (c2 == std::string::npos) {
            throw UsageError("motion segment '" + item + "' must be kind:target:duration");
        }
        MotionSegment seg;
        const std::string kind = item.substr(0, c1);
        if (kind == "opening") {
            seg.kind = Primitive::opening;
        } else if (kind == "protrusion") {
            seg.kind = Primitive::protrusion;
        } else if (kind == "lateral") {
            seg.kind = Primitive::lateral;
        } else {
            throw UsageError("unknown motion primitive '" + kind + "'");
        }
        try {
            std::size_t used = 0;
            const std::string target = item.substr(c1 + 1, c2 - c1 - 1);
            seg.target = std::stod(target, &used);
            if (used != target.size()) throw std::invalid_argument(target);
            const std::string duration = item.substr(c2 + 1);
            seg.duration_s = std::stod(duration, &used);
            if (used != duration.size()) throw std::invalid_argument(duration);
        } catch (const std::logic_error&) {
            throw UsageError("motion segment '" + item + "' has a malformed number");
        }
        script.segments.push_back(seg);
        if (end == text.size()) break;
    }
    script.check();
    return script;
}

RigidTransform script_pose(const MotionScript& script, const Line3& condylar_axis, double t) {
    std::array<double, 3> value{};  // opening (deg), protrusion, lateral
    double start = 0.0;
    for (const MotionSegment& s : script.segments) {
        double& v = value[static_cast<int>(s.kind)];
        if (t >= start + s.duration_s) {
            v = s.target;
        } else if (t > start) {
            v += (s.target - v) * smoothstep((t - start) / s.duration_s);
            break;
        } else {
            break;
        }
        start += s.duration_s;
    }
    const RigidTransform rotate =
        value[0] == 0.0 ? RigidTransform::identity()
                        : RigidTransform::rotation_about(condylar_axis.direction, -value[0] * kDeg, condylar_axis.point);
    return compose(RigidTransform::from_translation(Vec3(value[2], value[1], 0.0)), rotate);
}

RigidTransform head_pose(std::uint64_t seed, double t) {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> normal;
    const Vec3 axis = unit_or(Vec3(normal(rng), normal(rng), normal(rng)), Vec3::UnitZ());
    const Vec3 shift = 2.0 * unit_or(Vec3(normal(rng), normal(rng), normal(rng)), Vec3::UnitX());
    const double wave = std::sin(2.0 * std::numbers::pi * 0.5 * t);
    if (wave == 0.0) {
        return RigidTransform::identity();
    }
    return compose(RigidTransform::from_translation(wave * shift),
                   RigidTransform::rotation_about(axis, 3.0 * kDeg * wave, Vec3(0.0, 25.0, 0.0)));
}

namespace {

MarkerTriangle add_noise(const MarkerTriangle& m, std::normal_distribution<double>& noise, std::mt19937_64& rng) {
    MarkerTriangle out = m;
    for (Vec3& p : out.points) {
        for (int a = 0; a < 3; ++a) p[a] += noise(rng);
    }
    return out;
}

}  // namespace

MotionData make_motion(const MotionScript& script, const Phantom& phantom, const MotionOptions& options) {
    script.check();
    if (!(options.noise_sigma_mm >= 0.0) || !std::isfinite(options.noise_sigma_mm)) {
        throw UsageError("noise sigma must be non-negative");
    }
    const auto count = static_cast<std::size_t>(std::floor(script.duration() * script.rate_hz + 1e-9)) + 1;
    const RigidTransform& x = options.device_frame;
    MotionData out;
    out.clean.nominal_rate_hz = script.rate_hz;
    out.clean.samples.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const double t = static_cast<double>(k) / script.rate_hz;
        const RigidTransform d = script_pose(script, phantom.condylar_axis, t);
        const RigidTransform h = options.head_motion ? head_pose(options.seed, t) : RigidTransform::identity();
        out.truth.times.push_back(t);
        out.truth.transforms.push_back(d);
        MotionSample s;
        s.time = t;
        s.upper = phantom.upper_marker.transformed(compose(x, h));
        s.lower = phantom.lower_marker.transformed(compose(x, compose(h, d)));
        out.clean.samples.push_back(s);
    }
    if (options.noise_sigma_mm > 0.0) {
        std::mt19937_64 rng(options.seed);
        std::normal_distribution<double> noise(0.0, options.noise_sigma_mm);
        MotionSequence noisy = out.clean;
        for (MotionSample& s : noisy.samples) {
            s.upper = add_noise(s.upper, noise, rng);
            s.lower = add_noise(s.lower, noise, rng);
        }
        out.noisy = std::move(noisy);
    }
    return out;
}

std::vector<RigidTransform> calibration_motions(const Phantom& phantom, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const Vec3 center = 0.5 * (phantom.condyles[0] + phantom.condyles[1]);
    std::vector<RigidTransform> out;
    for (int k = 0; k < 3; ++k) {
        Vec3 dir = Vec3::Unit(k) + 0.15 * Vec3(unit(rng), unit(rng), unit(rng));
        dir.normalize();
        const double angle = (25.0 + 5.0 * unit(rng)) * kDeg;
        const Vec3 point = center + 10.0 * Vec3(unit(rng), unit(rng), unit(rng));
        out.push_back(RigidTransform::rotation_about(dir, angle, point));
    }
    return out;
}

RelativeMotion observe_calibration(const Phantom& phantom, const std::vector<RigidTransform>& motions,
                                   const MotionOptions& options) {
    if (!(options.noise_sigma_mm >= 0.0) || !std::isfinite(options.noise_sigma_mm)) {
        throw UsageError("noise sigma must be non-negative");
    }
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> noise(0.0, std::max(options.noise_sigma_mm, 1e-300));
    const bool noisy = options.noise_sigma_mm > 0.0;
    const RigidTransform& x = options.device_frame;
    RelativeMotion out;
    for (std::size_t k = 0; k < motions.size(); ++k) {
        MotionSequence seq;
        for (int i = 0; i < 2; ++i) {
            MotionSample s;
            s.time = static_cast<double>(i);
            s.upper = phantom.upper_marker.transformed(x);
            s.lower = phantom.lower_marker.transformed(i == 0 ? x : compose(x, motions[k]));
            if (noisy) {
                s.upper = add_noise(s.upper, noise, rng);
                s.lower = add_noise(s.lower, noise, rng);
            }
            seq.samples.push_back(s);
        }
        out.times.push_back(static_cast<double>(k));
        out.transforms.push_back(relative_motion(seq).transforms[1]);
    }
    return out;
}

}  // namespace mandikin::synth
