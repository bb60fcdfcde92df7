// Acceptance checks: one PASS/FAIL line per criterion; exit status 1 if any fail.

#include "cli.hpp"
#include "fuzz.hpp"
#include "oracles.hpp"

#include "mandikin/contact.hpp"
#include "mandikin/error.hpp"
#include "mandikin/io.hpp"
#include "mandikin/motion.hpp"
#include "mandikin/radiograph.hpp"
#include "mandikin/registration.hpp"
#include "mandikin/synth.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>

using namespace mandikin;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double rad2deg(double r) { return r / oracle::kDeg; }

// ---------------------------------------------------------------- 1

void procrustes(Outcome& o) {
    std::mt19937_64 rng(1001);
    const auto t0 = Clock::now();
    double rot = 0, trans = 0;
    for (int i = 0; i < 100; ++i) {
        const RigidTransform truth = oracle::random_transform(rng);
        CorrespondenceSet c;
        for (int k = 0; k < 10; ++k) {
            c.source.push_back(oracle::random_vec(rng, 50));
            c.target.push_back(apply_point(truth, c.source.back()));
        }
        const RigidFit fit = fit_rigid_landmarks(c);
        rot = std::max(rot, oracle::rotation_error(fit.transform.rotation, truth.rotation));
        trans = std::max(trans, (fit.transform.translation - truth.translation).norm());
    }
    const double secs = seconds_since(t0);
    o.detail << "max rotation error " << rot << " rad, max translation error " << trans << " mm, " << secs << " s";
    o.require(rot < 1e-9, "rotation < 1e-9 rad");
    o.require(trans < 1e-9, "translation < 1e-9 mm");
    o.require(secs < 1.0, "runtime < 1 s");
}

// ---------------------------------------------------------------- 2

// Uniform random points on the surface of a mesh (area-weighted faces).
std::vector<Vec3> sample_surface(const TriangleMesh& m, std::size_t n, std::mt19937_64& rng) {
    std::vector<double> areas;
    for (std::size_t f = 0; f < m.faces.size(); ++f) areas.push_back(m.face_area(f));
    std::discrete_distribution<std::size_t> face(areas.begin(), areas.end());
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<Vec3> pts;
    for (std::size_t i = 0; i < n; ++i) {
        const Face& f = m.faces[face(rng)];
        double a = u(rng), b = u(rng);
        if (a + b > 1) {
            a = 1 - a;
            b = 1 - b;
        }
        const Vec3& p0 = m.vertices[f[0]];
        pts.push_back(p0 + a * (m.vertices[f[1]] - p0) + b * (m.vertices[f[2]] - p0));
    }
    return pts;
}

void icp_basin(Outcome& o) {
    const TriangleMesh cube = synth::make_box(Vec3::Constant(-20), Vec3::Constant(20), 4);
    const SpatialIndex target(cube);
    std::mt19937_64 rng(1002);
    std::uniform_real_distribution<double> angle(0, 10 * oracle::kDeg), dist(0, 5);
    const auto t0 = Clock::now();
    double worst_rot = 0, worst_trans = 0;
    bool monotone = true;
    const int trials = 20;
    for (int i = 0; i < trials; ++i) {
        const RigidTransform offset = compose(RigidTransform::from_translation(dist(rng) * oracle::random_unit(rng)),
                                              RigidTransform::rotation_about(oracle::random_unit(rng), angle(rng),
                                                                             Vec3::Zero()));
        // Resampled surface points, displaced by the inverse offset.
        std::vector<Vec3> src = sample_surface(cube, 3000, rng);
        for (Vec3& p : src) p = apply_point(invert(offset), p);
        IcpParams p;
        p.max_iterations = 300;
        p.convergence_mm = 1e-10;
        const IcpResult r = icp(src, target, RigidTransform::identity(), p);
        worst_rot = std::max(worst_rot, rad2deg(oracle::rotation_error(r.transform.rotation, offset.rotation)));
        worst_trans = std::max(worst_trans, (r.transform.translation - offset.translation).norm());
        for (std::size_t k = 1; k < r.history.size(); ++k) monotone = monotone && r.history[k] <= r.history[k - 1];
    }
    const double secs = seconds_since(t0);
    o.detail << trials << " offsets up to 10 deg/5 mm: worst " << worst_rot << " deg, " << worst_trans
             << " mm, history non-increasing " << (monotone ? "yes" : "no") << ", " << secs << " s";
    o.require(worst_rot < 0.1, "rotation < 0.1 deg");
    o.require(worst_trans < 0.1, "translation < 0.1 mm");
    o.require(monotone, "history non-increasing");
    o.require(secs < 10.0, "runtime < 10 s");
}

// ---------------------------------------------------------------- 3

void screw_round_trip(Outcome& o) {
    std::mt19937_64 rng(1003);
    std::vector<RigidTransform> cases = {RigidTransform::identity(),
                                         RigidTransform::from_translation(Vec3(3, -4, 12)),
                                         RigidTransform::from_translation(Vec3(0, 0, 1e-7))};
    for (int i = 0; i < 1000; ++i) cases.push_back(oracle::random_transform(rng));
    double worst = 0;
    for (const RigidTransform& t : cases) worst = std::max(worst, max_corner_deviation(from_screw(to_screw(t)), t));
    o.detail << cases.size() << " transforms incl. identity and pure translations: max corner error " << worst << " mm";
    o.require(worst < 1e-9, "corner error < 1e-9 mm");
}

// ---------------------------------------------------------------- 4

// Three random motions about axes near the hinge, pairwise axis angles > 10 deg.
std::vector<RigidTransform> random_calibration(const Vec3& hinge, std::mt19937_64& rng) {
    std::vector<RigidTransform> out;
    while (out.size() < 3) {
        const Eigen::AngleAxisd aa(oracle::random_rotation(rng));
        if (aa.angle() < 0.05) continue;
        bool spread = true;
        for (const RigidTransform& m : out) {
            spread = spread && std::acos(std::min(1.0, std::abs(to_screw(m).axis.direction.dot(aa.axis())))) > 10 * oracle::kDeg;
        }
        if (spread) out.push_back(RigidTransform::rotation_about(aa.axis(), aa.angle(), hinge + oracle::random_vec(rng, 10)));
    }
    return out;
}

void axis_alignment(Outcome& o) {
    synth::PhantomSpec spec;
    spec.resolution_mm = 4;
    const synth::Phantom ph = synth::make_phantom(spec);
    const Vec3 hinge = 0.5 * (ph.condyles[0] + ph.condyles[1]);
    std::mt19937_64 rng(1004);

    double exact_rot = 0, exact_trans = 0;
    std::vector<double> rot, trans, hinge_rot, hinge_trans;
    // Frame error as the residual rigid map in anatomy coordinates.
    auto record = [](const RigidTransform& est, const RigidTransform& truth, std::vector<double>& r, std::vector<double>& t) {
        const RigidTransform err = compose(invert(truth), est);
        r.push_back(rad2deg(oracle::angle_of(err.rotation)));
        t.push_back(err.translation.norm());
    };
    for (int i = 0; i < 100; ++i) {
        synth::MotionOptions opt;
        opt.device_frame = oracle::random_transform(rng);
        opt.seed = 5000 + i;
        const std::vector<RigidTransform> anatomy = random_calibration(hinge, rng);
        std::vector<RigidTransform> device;
        for (const RigidTransform& m : anatomy) device.push_back(compose(opt.device_frame, compose(m, invert(opt.device_frame))));
        const RigidTransform x = align_frames_by_axes(device, anatomy);
        exact_rot = std::max(exact_rot, oracle::rotation_error(x.rotation, opt.device_frame.rotation));
        exact_trans = std::max(exact_trans, (x.translation - opt.device_frame.translation).norm());

        opt.noise_sigma_mm = 0.05;
        record(align_frames_by_axes(synth::observe_calibration(ph, anatomy, opt).transforms, anatomy), opt.device_frame,
               rot, trans);
        // Informational: the small-angle hinge protocol used by the synthetic calibration.
        const std::vector<RigidTransform> small = synth::calibration_motions(ph, 100 + i);
        record(align_frames_by_axes(synth::observe_calibration(ph, small, opt).transforms, small), opt.device_frame,
               hinge_rot, hinge_trans);
    }
    bool rejected = false;
    try {
        std::vector<RigidTransform> par;
        for (double y : {0.0, 10.0, 20.0}) par.push_back(RigidTransform::rotation_about(Vec3::UnitX(), 0.3, Vec3(0, y, 0)));
        align_frames_by_axes(par, par);
    } catch (const NumericError& e) {
        rejected = std::string(e.what()) == "degenerate axis configuration";
    }
    const double mr = median(rot), mt = median(trans);
    o.detail << "noiseless max error " << exact_rot << " rad/" << exact_trans << " mm; sigma 0.05 mm median over 100: "
             << mr << " deg/" << mt << " mm (max " << *std::max_element(rot.begin(), rot.end()) << " deg/"
             << *std::max_element(trans.begin(), trans.end()) << " mm; 25 deg hinge protocol " << median(hinge_rot)
             << " deg/" << median(hinge_trans) << " mm); parallel axes rejected "
             << (rejected ? "yes" : "no");
    o.require(exact_rot < 1e-6 && exact_trans < 1e-6, "noiseless within 1e-6");
    o.require(mr < 0.5, "median rotation < 0.5 deg");
    o.require(mt < 0.5, "median translation < 0.5 mm");
    o.require(rejected, "degenerate axis configuration error");
}

// ---------------------------------------------------------------- 5

ContactParams contact_params() {
    ContactParams p;
    p.threshold_mm = 0.5;
    return p;
}

double sphere_pair_area(double gap, int level) {
    const TriangleMesh a = synth::make_icosphere(Vec3(0, 0, -(10 + gap / 2)), 10, level);
    const TriangleMesh b = synth::make_icosphere(Vec3(0, 0, 10 + gap / 2), 10, level);
    return contact_map(a, SpatialIndex(b), contact_params()).area;
}

void contact_oracle(Outcome& o) {
    const double expect = oracle::contact_cap_area(10, 20.3, 0.5);
    // The all-three-vertices face rule drops a boundary ring about one edge
    // wide; level 8 (0.04 mm edges) keeps that loss inside the tolerance.
    const int level = 8;
    const double edge = 10 * 1.0514622 / (1 << level);
    const double area = sphere_pair_area(0.3, level);
    const double rel = std::abs(area - expect) / expect;
    const double far = sphere_pair_area(1.0, 7);

    // Spheres pulled apart frame by frame from a 0.3 mm gap.
    const TriangleMesh a = synth::make_icosphere(Vec3(0, 0, -10.15), 10, 6);
    const TriangleMesh b = synth::make_icosphere(Vec3(0, 0, 10.15), 10, 6);
    RelativeMotion rm;
    for (int i = 0; i <= 8; ++i) {
        rm.times.push_back(0.1 * i);
        rm.transforms.push_back(RigidTransform::from_translation(Vec3(0, 0, -0.05 * i)));
    }
    const ContactSeries series = contact_series(a, b, rm, contact_params());
    bool monotone = true;
    for (std::size_t i = 1; i < series.size(); ++i) monotone = monotone && series[i].area <= series[i - 1].area;
    o.detail << "cap oracle " << expect << " mm^2, mesh (edge " << edge << " mm) " << area << " mm^2 (" << 100 * rel
             << "%); gap 1.0 area " << far << "; separation series " << series.front().area << " -> "
             << series.back().area << (monotone ? " non-increasing" : " NOT monotone");
    o.require(rel < 0.05, "area within 5%");
    o.require(far == 0.0, "empty at gap 1.0");
    o.require(monotone && series.back().area == 0.0, "series non-increasing to zero");
}

// ---------------------------------------------------------------- 6

void drr(Outcome& o) {
    const VoxelVolume vol = VoxelVolume::filled({10, 10, 10}, Vec3::Ones(), Vec3::Constant(-4.5), 0.02);
    const TriangleMesh box = synth::make_box(Vec3::Constant(-5), Vec3::Constant(5), 10);
    ProjectionCamera cam;
    cam.width = cam.height = 9;
    cam.detector_origin = Vec3(-4, -4, -50);
    double slab = 0, agree = 0, linear = 0;
    for (const ProjectionMode mode : {ProjectionMode::parallel, ProjectionMode::point_source}) {
        cam.mode = mode;
        cam.source = Vec3(0, 0, 1000);
        const ProjectionImage v = drr_voxel(vol, cam);
        const ProjectionImage s = drr_surface({{box, 0.02}}, cam);
        // Point-source rays off the centre cross the slab slightly obliquely.
        for (std::size_t r = 0; r < cam.height; ++r) {
            for (std::size_t c = 0; c < cam.width; ++c) {
                const Vec3 px = cam.pixel_center(c, r);
                const Vec3 d = mode == ProjectionMode::parallel ? Vec3::UnitZ() : Vec3((px - cam.source).normalized());
                const double expect = 0.02 * 10 / std::abs(d.z());
                slab = std::max({slab, std::abs(v.at(c, r) - expect), std::abs(s.at(c, r) - expect)});
                agree = std::max(agree, std::abs(v.at(c, r) - s.at(c, r)) / s.at(c, r));
            }
        }
        VoxelVolume scaled = vol;
        for (double& x : scaled.values) x *= 7.0;
        const ProjectionImage v7 = drr_voxel(scaled, cam);
        const ProjectionImage s7 = drr_surface({{box, 0.14}}, cam);
        for (std::size_t p = 0; p < v.values.size(); ++p) {
            linear = std::max({linear, std::abs(v7.values[p] - 7.0 * v.values[p]), std::abs(s7.values[p] - 7.0 * s.values[p])});
        }
    }
    o.detail << "cube slab max error " << slab << " (both modes), voxel/surface max relative difference " << agree
             << ", linearity error " << linear;
    o.require(slab < 1e-9, "slab value 0.2 within 1e-9");
    o.require(agree < 0.02, "voxel/surface within 2%");
    o.require(linear < 1e-12, "linearity within 1e-12");
}

// ---------------------------------------------------------------- 7

void isosurface(Outcome& o) {
    VoxelVolume v = VoxelVolume::filled({51, 51, 51}, Vec3::Ones(), Vec3::Constant(-25));
    for (std::size_t k = 0; k < 51; ++k)
        for (std::size_t j = 0; j < 51; ++j)
            for (std::size_t i = 0; i < 51; ++i) v.at(i, j, k) = 20 - v.center(i, j, k).norm();
    const TriangleMesh m = extract_isosurface(v, 0.0);
    double worst = 0;
    for (const Vec3& p : m.vertices) worst = std::max(worst, std::abs(p.norm() - 20));
    const bool closed = !m.empty() && is_watertight(m);
    o.detail << m.faces.size() << " faces, max radial error " << worst << " mm, watertight " << (closed ? "yes" : "no");
    o.require(worst < 0.5, "radial error < 0.5 mm");
    o.require(closed, "watertight");
}

// ---------------------------------------------------------------- 8

void stabilization(Outcome& o) {
    synth::PhantomSpec spec;
    spec.resolution_mm = 4;
    const synth::Phantom ph = synth::make_phantom(spec);
    const synth::MotionScript script = synth::parse_motion_script("opening:30:1,protrusion:4:0.5,lateral:-3:0.5");
    std::mt19937_64 rng(1008);
    synth::MotionOptions still;
    still.device_frame = oracle::random_transform(rng);
    synth::MotionOptions moving = still;
    moving.head_motion = true;
    const synth::MotionData a = synth::make_motion(script, ph, still);
    const synth::MotionData b = synth::make_motion(script, ph, moving);

    const MotionSequence st = stabilize(b.clean);
    double upper = 0;
    for (const MotionSample& s : st.samples) {
        for (int k = 0; k < 3; ++k) upper = std::max(upper, (s.upper.points[k] - st.samples[0].upper.points[k]).norm());
    }
    const RelativeMotion ra = relative_motion(a.clean), rb = relative_motion(b.clean);
    double inv = 0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        // Deviation of phantom-scale points (corners of a 100 mm cube).
        inv = std::max(inv, max_corner_deviation(ra.transforms[i], rb.transforms[i], 50));
    }
    o.detail << st.samples.size() << " frames with head motion: upper-marker deviation " << upper
             << " mm, head-motion invariance " << inv << " mm";
    o.require(upper < 1e-9, "upper deviation < 1e-9 mm");
    o.require(inv < 1e-9, "head-motion invariance < 1e-9");
}

// ---------------------------------------------------------------- 9

int run_cli(std::vector<std::string> args) {
    const int code = cli::run(args);
    if (code != 0) {
        std::string joined;
        for (const auto& a : args) joined += a + " ";
        throw std::runtime_error("command failed (" + std::to_string(code) + "): " + joined);
    }
    return code;
}

void end_to_end(Outcome& o) {
    const fs::path dir = fs::temp_directory_path() / "mandikin_acceptance_e2e";
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto p = [&](const char* name) { return (dir / name).string(); };
    const auto t0 = Clock::now();

    run_cli({"synth", "phantom", "--out-dir", dir.string(), "--resolution-mm", "1"});
    run_cli({"synth", "motion", "--out-dir", dir.string(), "--script",
             "opening:25:1,protrusion:3:0.5,lateral:2:0.5,opening:0:1", "--device-seed", "11", "--head-motion"});
    run_cli({"stabilize", "--motion", p("motion.csv"), "--out", p("stabilized.csv"), "--relative-out", p("relative.csv")});
    run_cli({"register", "axes", "--motions-f", p("calibration_device.csv"), "--motions-g", p("calibration_anatomy.csv"),
             "--out", p("frame.json")});
    run_cli({"animate", "--motion", p("relative.csv"), "--frame-transform", p("frame.json"), "--mesh", p("mandible.ply"),
             "--out-dir", p("frames"), "--frames", "0,40,75,150,225", "--motion-out", p("applied.csv")});
    run_cli({"contact", "series", "--moving", p("mandible.ply"), "--static", p("maxilla.ply"), "--motion",
             p("relative.csv"), "--frame-transform", p("frame.json"), "--out", p("series.csv")});
    const double secs = seconds_since(t0);

    // Condylar-point trajectory: recovered motion vs ground truth, every frame.
    const RelativeMotion applied = io::load_relative_motion(dir / "applied.csv");
    const RelativeMotion truth = io::load_relative_motion(dir / "truth.csv");
    const io::LandmarkSet anatomy = io::load_landmarks(dir / "anatomy.csv");
    double worst = 0;
    bool sizes = applied.size() == truth.size();
    for (std::size_t i = 0; sizes && i < truth.size(); ++i) {
        for (const io::Landmark& l : anatomy) {
            if (l.name.rfind("condyle", 0) != 0) continue;
            worst = std::max(worst, (apply_point(applied.transforms[i], l.position) -
                                     apply_point(truth.transforms[i], l.position)).norm());
        }
    }
    // Animated meshes against the truth-posed mandible.
    const TriangleMesh mandible = io::load_mesh(dir / "mandible.ply");
    double mesh_dev = 0;
    for (std::size_t f : {0, 40, 75, 150, 225}) {
        char name[32];
        std::snprintf(name, sizeof name, "frame_%05zu.ply", f);
        const TriangleMesh posed = io::load_mesh(dir / "frames" / name);
        for (std::size_t v = 0; v < mandible.vertices.size(); ++v) {
            mesh_dev = std::max(mesh_dev, (posed.vertices[v] - apply_point(truth.transforms[f], mandible.vertices[v])).norm());
        }
    }
    const std::string series = io::read_file(dir / "series.csv");
    const auto frames = std::count(series.begin(), series.end(), '\n') - 1;
    o.detail << truth.size() << " frames: condylar-point max error " << worst << " mm, animated mesh max deviation "
             << mesh_dev << " mm, " << frames << " contact-series rows, pipeline " << secs << " s";
    o.require(sizes, "frame counts match");
    o.require(worst < 0.2, "condylar point within 0.2 mm");
    o.require(mesh_dev < 0.2, "animated mesh within 0.2 mm");
    o.require(static_cast<std::size_t>(frames) == truth.size(), "one contact row per frame");
}

// ---------------------------------------------------------------- 10

struct FuzzTally {
    int round_trips = 0;
    int mismatches = 0;
    int mutations = 0;
    int rejected = 0;
    int unstructured = 0;
};

void mutate_and_parse(FuzzTally& t, const std::string& valid, const std::function<void(const std::string&)>& parse,
                      std::mt19937_64& rng) {
    for (int i = 0; i < 200; ++i) {
        ++t.mutations;
        try {
            parse(fuzz::mutate(valid, rng));
        } catch (const IoError&) {
            ++t.rejected;
        } catch (...) {
            ++t.unstructured;
        }
    }
}

void format_robustness(Outcome& o) {
    std::mt19937_64 rng(1010);
    FuzzTally t;
    std::vector<std::string> formats;
    auto trip = [&](bool ok) {
        ++t.round_trips;
        if (!ok) ++t.mismatches;
    };

    using io::MeshFormat;
    for (const auto& [name, format] : {std::pair{"ply", MeshFormat::ply_ascii}, std::pair{"obj", MeshFormat::obj},
                                       std::pair{"stl-binary", MeshFormat::stl_binary},
                                       std::pair{"stl-ascii", MeshFormat::stl_ascii}}) {
        formats.push_back(name);
        const bool stl = format == MeshFormat::stl_binary || format == MeshFormat::stl_ascii;
        for (int i = 0; i < 1000; ++i) {
            const TriangleMesh m = fuzz::random_mesh(rng, stl, format == MeshFormat::ply_ascii && i % 2);
            const std::string bytes = io::format_mesh(m, format);
            const TriangleMesh back = io::parse_mesh(bytes, format);
            bool ok = back.faces.size() == m.faces.size();
            for (std::size_t f = 0; ok && f < m.faces.size(); ++f) {
                for (int k = 0; k < 3; ++k) ok = ok && back.vertices[back.faces[f][k]] == m.vertices[m.faces[f][k]];
            }
            if (!stl) ok = ok && back.vertices == m.vertices && back.normals == m.normals;
            trip(ok);
            if (i < 5) mutate_and_parse(t, bytes, [&](const std::string& s) { io::parse_mesh(s, format); }, rng);
        }
    }

    formats.push_back("motion-csv");
    for (int i = 0; i < 1000; ++i) {
        const MotionSequence seq = fuzz::random_motion(rng);
        const std::string text = io::format_motion(seq);
        const MotionSequence back = io::parse_motion(text);
        bool ok = back.samples.size() == seq.samples.size();
        for (std::size_t k = 0; ok && k < seq.samples.size(); ++k) {
            ok = back.samples[k].time == seq.samples[k].time && back.samples[k].upper.points == seq.samples[k].upper.points &&
                 back.samples[k].lower.points == seq.samples[k].lower.points;
        }
        trip(ok);
        if (i < 5) mutate_and_parse(t, text, [](const std::string& s) { io::parse_motion(s); }, rng);
    }

    formats.push_back("relative-motion-csv");
    for (int i = 0; i < 1000; ++i) {
        RelativeMotion rm;
        for (int k = 0; k < 1 + i % 7; ++k) {
            rm.times.push_back(0.5 * k);
            rm.transforms.push_back(oracle::random_transform(rng));
        }
        const std::string text = io::format_relative_motion(rm);
        const RelativeMotion back = io::parse_relative_motion(text);
        bool ok = back.size() == rm.size();
        for (std::size_t k = 0; ok && k < rm.size(); ++k) {
            ok = back.transforms[k].rotation == rm.transforms[k].rotation &&
                 back.transforms[k].translation == rm.transforms[k].translation;
        }
        trip(ok);
        if (i < 5) mutate_and_parse(t, text, [](const std::string& s) { io::parse_relative_motion(s); }, rng);
    }

    formats.push_back("landmarks-csv");
    for (int i = 0; i < 1000; ++i) {
        io::LandmarkSet set;
        for (int k = 0; k < i % 9; ++k) {
            set.push_back({"L" + std::to_string(k), Vec3(fuzz::random_double(rng), fuzz::random_double(rng), fuzz::random_double(rng))});
        }
        const std::string text = io::format_landmarks(set);
        const io::LandmarkSet back = io::parse_landmarks(text);
        bool ok = back.size() == set.size();
        for (std::size_t k = 0; ok && k < set.size(); ++k) ok = back[k].name == set[k].name && back[k].position == set[k].position;
        trip(ok);
        if (i < 5 && !set.empty()) mutate_and_parse(t, text, [](const std::string& s) { io::parse_landmarks(s); }, rng);
    }

    formats.push_back("transform-json");
    for (int i = 0; i < 1000; ++i) {
        const RigidTransform x = oracle::random_transform(rng);
        const std::string text = io::format_transform(x, {0.1, i, 3});
        const RigidTransform back = io::parse_transform(text);
        trip(back.rotation == x.rotation && back.translation == x.translation);
        if (i < 5) mutate_and_parse(t, text, [](const std::string& s) { io::parse_transform(s); }, rng);
    }

    formats.push_back("camera-json");
    for (int i = 0; i < 1000; ++i) {
        ProjectionCamera cam;
        const Mat3 r = oracle::random_rotation(rng);
        cam.u_axis = r.col(0);
        cam.v_axis = r.col(1);
        cam.detector_origin = oracle::random_vec(rng, 100);
        cam.width = 1 + i % 300;
        cam.height = 1 + i % 200;
        cam.pitch = 0.25 + 0.01 * (i % 50);
        if (i % 2) {
            cam.mode = ProjectionMode::point_source;
            cam.source = cam.detector_origin + 500 * r.col(2);
        }
        const std::string text = io::format_camera(cam);
        const ProjectionCamera back = io::parse_camera(text);
        trip(back.mode == cam.mode && back.u_axis == cam.u_axis && back.v_axis == cam.v_axis &&
             back.detector_origin == cam.detector_origin && back.width == cam.width && back.height == cam.height &&
             back.pitch == cam.pitch && (cam.mode == ProjectionMode::parallel || back.source == cam.source));
        if (i < 5) mutate_and_parse(t, text, [](const std::string& s) { io::parse_camera(s); }, rng);
    }

    formats.push_back("volume");
    for (int i = 0; i < 1000; ++i) {
        io::VolumeHeader h;
        h.dims = {1 + rng() % 6, 1 + rng() % 6, 1 + rng() % 6};
        h.spacing = Vec3(0.5 + 0.1 * (i % 7), 1.0, 0.25);
        h.origin = Vec3(fuzz::random_double(rng), fuzz::random_double(rng), fuzz::random_double(rng));
        h.data = "scan.raw";
        VoxelVolume v = VoxelVolume::filled(h.dims, h.spacing, h.origin);
        for (double& x : v.values) x = static_cast<float>(fuzz::random_double(rng));
        const std::string text = io::format_volume_header(h);
        const io::VolumeHeader hb = io::parse_volume_header(text);
        const VoxelVolume vb = io::decode_volume(hb, io::encode_volume_values(v));
        trip(hb.dims == h.dims && hb.spacing == h.spacing && hb.origin == h.origin && vb.values == v.values);
        if (i < 5) {
            mutate_and_parse(t, text, [](const std::string& s) { io::parse_volume_header(s); }, rng);
            const std::string raw = io::encode_volume_values(v);
            mutate_and_parse(t, raw, [&](const std::string& s) {
                if (s.size() == raw.size()) throw IoError("same size");  // a byte edit keeps the size; not malformed
                io::decode_volume(h, s);
            }, rng);
        }
    }

    formats.push_back("image-csv");
    for (int i = 0; i < 1000; ++i) {
        ProjectionImage img;
        img.width = 1 + i % 5;
        img.height = 1 + i % 4;
        for (std::size_t k = 0; k < img.width * img.height; ++k) img.values.push_back(fuzz::random_double(rng));
        const std::string text = io::format_image_csv(img);
        const ProjectionImage back = io::parse_image_csv(text);
        trip(back.width == img.width && back.height == img.height && back.values == img.values);
        if (i < 5) mutate_and_parse(t, text, [](const std::string& s) { io::parse_image_csv(s); }, rng);
    }

    o.detail << t.round_trips << " round trips over " << formats.size() << " formats, " << t.mismatches
             << " mismatches; " << t.mutations << " mutations, " << t.rejected << " rejected with IoError, "
             << t.unstructured << " unstructured errors";
    o.require(t.round_trips == 1000 * static_cast<int>(formats.size()), "1000 round trips per format");
    o.require(t.mismatches == 0, "round trips exact");
    o.require(t.unstructured == 0, "malformed input gives structured errors");
    o.require(t.rejected > 0, "mutations exercised the error paths");
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, void (*)(Outcome&)>> criteria = {
        {"procrustes exact recovery", procrustes},
        {"icp basin recovery on the cube phantom", icp_basin},
        {"screw round trip", screw_round_trip},
        {"axis-based frame alignment", axis_alignment},
        {"contact sphere-pair oracle", contact_oracle},
        {"drr cube slab, mode agreement, linearity", drr},
        {"isosurface of a sphere field", isosurface},
        {"stabilization and head-motion invariance", stabilization},
        {"end-to-end phantom pipeline", end_to_end},
        {"format robustness", format_robustness},
    };
    const auto t0 = Clock::now();
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        const auto start = Clock::now();
        try {
            criteria[i].second(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << " [exception: " << e.what() << "]";
        }
        if (!o.pass) ++failed;
        std::cout << (o.pass ? "PASS" : "FAIL") << " " << i + 1 << " " << criteria[i].first << ": " << o.detail.str()
                  << " (" << seconds_since(start) << " s)" << std::endl;
    }
    const double total = seconds_since(t0);
    std::cout << "acceptance: " << criteria.size() - failed << "/" << criteria.size() << " passed in " << total << " s"
              << std::endl;
    return failed == 0 ? 0 : 1;
}
