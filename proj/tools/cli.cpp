#include "cli.hpp"

#include "mandikin/contact.hpp"
#include "mandikin/error.hpp"
#include "mandikin/io.hpp"
#include "mandikin/radiograph.hpp"
#include "mandikin/registration.hpp"
#include "mandikin/synth.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

namespace mandikin::cli {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;

struct Context {
    Parallel par;
    Json report = Json::object();

    void output(const fs::path& p) { report["outputs"].push_back(p.string()); }
};

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw IoError("cannot create directory " + dir.string());
    }
}

const std::map<std::string, io::MeshFormat> kMeshFormats{{"ply", io::MeshFormat::ply_ascii},
                                                          {"obj", io::MeshFormat::obj},
                                                          {"stl", io::MeshFormat::stl_binary},
                                                          {"stl-ascii", io::MeshFormat::stl_ascii}};

std::string mesh_extension(const std::string& format) { return format == "stl-ascii" ? ".stl" : "." + format; }

void save_mesh_as(Context& ctx, const TriangleMesh& m, const fs::path& path, const std::string& format) {
    io::save_mesh(m, path, kMeshFormats.at(format));
    ctx.output(path);
}

std::vector<std::size_t> parse_frames(const std::string& text) {
    std::vector<std::size_t> frames;
    if (text.empty()) return frames;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const long long v = std::stoll(item, &used);
            if (used != item.size() || v < 0) throw std::invalid_argument(item);
            frames.push_back(static_cast<std::size_t>(v));
        } catch (const std::logic_error&) {
            throw UsageError("frame list entry '" + item + "' is not a non-negative integer");
        }
    }
    return frames;
}

/// Relative motion brought into the anatomy frame when a frame transform (anatomy -> device) is given.
RelativeMotion anatomy_motion(const std::string& motion_path, const std::string& frame_path, double rate) {
    RelativeMotion rm = io::load_relative_motion(motion_path);
    if (!frame_path.empty()) {
        rm = change_frame(rm, invert(io::load_transform(frame_path)));
    }
    if (rate > 0.0) {
        rm = resample(rm, rate);
    }
    return rm;
}

RigidTransform random_frame(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Eigen::Quaterniond q(normal(rng), normal(rng), normal(rng), normal(rng));
    q.normalize();
    return {q.toRotationMatrix(), Vec3(normal(rng), normal(rng), normal(rng)) * 50.0};
}

void add_synth(CLI::App& app, Context& ctx, std::function<void()>& action) {
    auto* synth = app.add_subcommand("synth", "Generate ground-truth phantoms and motions");
    synth->require_subcommand(1);

    struct PhantomOpts {
        std::string out_dir;
        synth::PhantomSpec spec;
        std::string format = "ply";
    };
    auto po = std::make_shared<PhantomOpts>();
    auto* phantom = synth->add_subcommand("phantom", "Write phantom meshes, marker triangles and an optional volume");
    phantom->add_option("--out-dir", po->out_dir, "Output directory")->required();
    phantom->add_option("--seed", po->spec.seed, "Random seed")->capture_default_str();
    phantom->add_option("--resolution-mm", po->spec.resolution_mm, "Target mesh edge length")
        ->check(CLI::PositiveNumber)->capture_default_str();
    phantom->add_option("--gap-mm", po->spec.occlusal_gap_mm, "Occlusal gap between the blocks")
        ->check(CLI::Range(0.0, 10.0))->capture_default_str();
    phantom->add_flag("--bow-spheres", po->spec.bow_spheres, "Also write spheres at the marker points");
    phantom->add_option("--voxel-mm", po->spec.voxel_mm, "Voxel size of the rasterized volume (0 = none)")
        ->check(CLI::NonNegativeNumber)->capture_default_str();
    phantom->add_option("--mu", po->spec.mu, "Attenuation per mm in the volume")
        ->check(CLI::NonNegativeNumber)->capture_default_str();
    phantom->add_option("--format", po->format, "Mesh format")
        ->check(CLI::IsMember({"ply", "obj", "stl", "stl-ascii"}))->capture_default_str();
    phantom->callback([&ctx, &action, po] {
        action = [&ctx, po] {
            const synth::Phantom ph = synth::make_phantom(po->spec, ctx.par);
            const fs::path dir(po->out_dir);
            ensure_dir(dir);
            const std::string ext = mesh_extension(po->format);
            save_mesh_as(ctx, ph.maxilla, dir / ("maxilla" + ext), po->format);
            save_mesh_as(ctx, ph.mandible, dir / ("mandible" + ext), po->format);
            if (po->spec.bow_spheres) {
                save_mesh_as(ctx, ph.upper_bow, dir / ("upper_bow" + ext), po->format);
                save_mesh_as(ctx, ph.lower_bow, dir / ("lower_bow" + ext), po->format);
            }
            io::LandmarkSet markers;
            for (int i = 0; i < 3; ++i) markers.push_back({"U" + std::to_string(i + 1), ph.upper_marker.points[i]});
            for (int i = 0; i < 3; ++i) markers.push_back({"L" + std::to_string(i + 1), ph.lower_marker.points[i]});
            io::save_landmarks(markers, dir / "markers.csv");
            ctx.output(dir / "markers.csv");
            io::save_landmarks({{"condyle_right", ph.condyles[0]}, {"condyle_left", ph.condyles[1]},
                                {"incisal", ph.incisal_point}},
                               dir / "anatomy.csv");
            ctx.output(dir / "anatomy.csv");
            if (ph.volume) {
                io::save_volume(*ph.volume, dir / "volume.vol");
                ctx.output(dir / "volume.vol");
            }
            ctx.report["maxilla_faces"] = ph.maxilla.faces.size();
            ctx.report["mandible_faces"] = ph.mandible.faces.size();
        };
    });

    struct MotionOpts {
        std::string out_dir;
        std::string script;
        double rate = 75.0;
        std::uint64_t seed = 1;
        double noise = 0.0;
        bool head = false;
        std::string device_frame;
        std::uint64_t device_seed = 0;
    };
    auto mo = std::make_shared<MotionOpts>();
    auto* motion = synth->add_subcommand("motion", "Write a scripted marker stream, its ground truth and calibration motions");
    motion->add_option("--out-dir", mo->out_dir, "Output directory")->required();
    motion->add_option("--script", mo->script, "Segments kind:target:duration, e.g. opening:20:1,protrusion:5:0.5")
        ->required();
    motion->add_option("--rate-hz", mo->rate, "Sample rate")->check(CLI::PositiveNumber)->capture_default_str();
    motion->add_option("--seed", mo->seed, "Phantom and noise seed")->capture_default_str();
    motion->add_option("--noise-mm", mo->noise, "Gaussian marker noise sigma")
        ->check(CLI::NonNegativeNumber)->capture_default_str();
    motion->add_flag("--head-motion", mo->head, "Superimpose smooth head motion");
    auto* frame_opt = motion->add_option("--device-frame", mo->device_frame, "Transform JSON mapping anatomy to device coordinates")
                          ;
    motion->add_option("--device-seed", mo->device_seed, "Random anatomy-to-device transform from this seed")
        ->excludes(frame_opt);
    motion->callback([&ctx, &action, mo] {
        action = [&ctx, mo] {
            const synth::MotionScript script = synth::parse_motion_script(mo->script, mo->rate);
            synth::PhantomSpec spec;
            spec.seed = mo->seed;
            spec.maxilla = spec.mandible = false;
            const synth::Phantom ph = synth::make_phantom(spec);
            synth::MotionOptions opt;
            opt.seed = mo->seed;
            opt.noise_sigma_mm = mo->noise;
            opt.head_motion = mo->head;
            if (!mo->device_frame.empty()) {
                opt.device_frame = io::load_transform(mo->device_frame);
            } else if (mo->device_seed != 0) {
                opt.device_frame = random_frame(mo->device_seed);
            }
            const synth::MotionData data = synth::make_motion(script, ph, opt);
            const fs::path dir(mo->out_dir);
            ensure_dir(dir);
            io::save_motion(data.noisy ? *data.noisy : data.clean, dir / "motion.csv");
            ctx.output(dir / "motion.csv");
            io::save_relative_motion(data.truth, dir / "truth.csv");
            ctx.output(dir / "truth.csv");
            const std::vector<RigidTransform> calib = synth::calibration_motions(ph, mo->seed);
            RelativeMotion calib_g;
            for (std::size_t k = 0; k < calib.size(); ++k) {
                calib_g.times.push_back(static_cast<double>(k));
                calib_g.transforms.push_back(calib[k]);
            }
            synth::MotionOptions calib_opt = opt;
            calib_opt.seed = mo->seed + 1;
            io::save_relative_motion(synth::observe_calibration(ph, calib, calib_opt), dir / "calibration_device.csv");
            io::save_relative_motion(calib_g, dir / "calibration_anatomy.csv");
            io::save_transform(opt.device_frame, dir / "device_frame.json");
            for (const char* f : {"calibration_device.csv", "calibration_anatomy.csv", "device_frame.json"}) {
                ctx.output(dir / f);
            }
            ctx.report["samples"] = data.clean.samples.size();
        };
    });
}

void add_register(CLI::App& app, Context& ctx, std::function<void()>& action) {
    auto* reg = app.add_subcommand("register", "Rigid registration");
    reg->require_subcommand(1);

    struct LandmarkOpts {
        std::string source, target, out;
    };
    auto lo = std::make_shared<LandmarkOpts>();
    auto* lm = reg->add_subcommand("landmarks", "Least-squares fit of landmarks matched by name");
    lm->add_option("--source", lo->source, "Source landmarks CSV")->required();
    lm->add_option("--target", lo->target, "Target landmarks CSV")->required();
    lm->add_option("--out", lo->out, "Output transform JSON (source -> target)")->required();
    lm->callback([&ctx, &action, lo] {
        action = [&ctx, lo] {
            const CorrespondenceSet c = io::match_landmarks(io::load_landmarks(lo->source), io::load_landmarks(lo->target));
            const RigidFit fit = fit_rigid_landmarks(c);
            io::save_transform(fit.transform, lo->out, {fit.rms, std::nullopt, c.size()});
            ctx.output(lo->out);
            ctx.report["rms_mm"] = fit.rms;
            ctx.report["correspondences"] = c.size();
        };
    });

    struct IcpOpts {
        std::string source, target, init, out;
        IcpParams params;
    };
    auto io_ = std::make_shared<IcpOpts>();
    auto* icp_cmd = reg->add_subcommand("icp", "Iterative closest point of a source mesh's vertices onto a target surface");
    icp_cmd->add_option("--source", io_->source, "Source mesh")->required();
    icp_cmd->add_option("--target", io_->target, "Target mesh")->required();
    icp_cmd->add_option("--init", io_->init, "Initial transform JSON");
    icp_cmd->add_option("--out", io_->out, "Output transform JSON")->required();
    icp_cmd->add_option("--max-iterations", io_->params.max_iterations, "Iteration cap")
        ->check(CLI::Range(1, 100000))->capture_default_str();
    icp_cmd->add_option("--convergence-mm", io_->params.convergence_mm, "Stop when the RMS changes less than this")
        ->check(CLI::NonNegativeNumber)->capture_default_str();
    icp_cmd->add_option("--max-distance-mm", io_->params.max_distance_mm, "Pair rejection distance (0 disables)")
        ->check(CLI::NonNegativeNumber)->capture_default_str();
    icp_cmd->add_option("--trim", io_->params.trim_fraction, "Fraction of worst pairs dropped")
        ->check(CLI::Range(0.0, 0.5))->capture_default_str();
    icp_cmd->callback([&ctx, &action, io_] {
        action = [&ctx, io_] {
            const TriangleMesh source = io::load_mesh(io_->source);
            const SpatialIndex target(io::load_mesh(io_->target));
            const RigidTransform init = io_->init.empty() ? RigidTransform::identity() : io::load_transform(io_->init);
            const IcpResult r = icp(source, target, init, io_->params, ctx.par);
            io::save_transform(r.transform, io_->out, {r.rms, r.iterations, r.correspondences});
            ctx.output(io_->out);
            ctx.report["rms_mm"] = r.rms;
            ctx.report["iterations"] = r.iterations;
            ctx.report["converged"] = r.converged;
            ctx.report["history"] = r.history;
        };
    });

    struct AxesOpts {
        std::string motions_f, motions_g, out;
    };
    auto ao = std::make_shared<AxesOpts>();
    auto* axes = reg->add_subcommand("axes", "Frame transform from three motions observed in two frames");
    axes->add_option("--motions-f", ao->motions_f, "Relative-motion CSV, 3 rows, frame F")
        ->required();
    axes->add_option("--motions-g", ao->motions_g, "Relative-motion CSV, 3 rows, frame G")
        ->required();
    axes->add_option("--out", ao->out, "Output transform JSON (G -> F)")->required();
    axes->callback([&ctx, &action, ao] {
        action = [&ctx, ao] {
            const RelativeMotion f = io::load_relative_motion(ao->motions_f);
            const RelativeMotion g = io::load_relative_motion(ao->motions_g);
            if (f.size() != 3 || g.size() != 3) {
                throw UsageError("axis alignment needs exactly 3 motions in each file");
            }
            const RigidTransform x = align_frames_by_axes(f.transforms, g.transforms);
            io::save_transform(x, ao->out);
            ctx.output(ao->out);
        };
    });

    struct GraphOpts {
        std::string graph, out_dir;
    };
    auto go = std::make_shared<GraphOpts>();
    auto* graph = reg->add_subcommand("graph", "Joint registration of several frames linked by landmark sets");
    graph->add_option("--graph", go->graph,
                      "Graph JSON: {anchor, frames, edges:[{from, to, source, target, weight}]}, paths relative to it")
        ->required();
    graph->add_option("--out-dir", go->out_dir, "Directory for one <frame>.json transform per frame")->required();
    graph->callback([&ctx, &action, go] {
        action = [&ctx, go] {
            const fs::path gpath(go->graph);
            Json j;
            try {
                j = Json::parse(io::read_file(gpath));
            } catch (const Json::exception& e) {
                throw IoError(gpath.string() + ": invalid JSON: " + e.what());
            }
            FrameGraph g;
            try {
                g.anchor = j.at("anchor").get<std::string>();
                g.frames = j.at("frames").get<std::vector<std::string>>();
                for (const Json& e : j.at("edges")) {
                    FrameGraph::Edge edge;
                    edge.from = e.at("from").get<std::string>();
                    edge.to = e.at("to").get<std::string>();
                    edge.weight = e.value("weight", 1.0);
                    const fs::path base = gpath.parent_path();
                    edge.pairs = io::match_landmarks(io::load_landmarks(base / e.at("source").get<std::string>()),
                                                     io::load_landmarks(base / e.at("target").get<std::string>()));
                    g.edges.push_back(std::move(edge));
                }
            } catch (const Json::exception& e) {
                throw IoError(gpath.string() + ": " + e.what());
            }
            for (const std::string& f : g.frames) {
                if (f.empty() || f.find_first_of("/\\") != std::string::npos || f == "." || f == "..") {
                    throw UsageError("frame name '" + f + "' cannot be used as a file name");
                }
            }
            const GraphResult r = register_graph(g);
            const fs::path dir(go->out_dir);
            ensure_dir(dir);
            for (const auto& [name, t] : r.transforms) {
                io::save_transform(t, dir / (name + ".json"));
                ctx.output(dir / (name + ".json"));
            }
            ctx.report["edge_rms_mm"] = r.edge_rms;
            ctx.report["total_residual"] = r.total_residual;
            ctx.report["sweeps"] = r.sweeps;
        };
    });
}

void add_stabilize(CLI::App& app, Context& ctx, std::function<void()>& action) {
    struct Opts {
        std::string motion, out, relative_out;
        std::size_t reference = 0;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand("stabilize", "Remove head motion from a marker stream");
    cmd->add_option("--motion", o->motion, "Marker-stream CSV")->required();
    cmd->add_option("--out", o->out, "Stabilized marker-stream CSV")->required();
    cmd->add_option("--reference", o->reference, "Reference sample index")->capture_default_str();
    cmd->add_option("--relative-out", o->relative_out, "Also write the relative motion CSV");
    cmd->callback([&ctx, &action, o] {
        action = [&ctx, o] {
            const MotionSequence seq = io::load_motion(o->motion);
            io::save_motion(stabilize(seq, o->reference, ctx.par), o->out);
            ctx.output(o->out);
            if (!o->relative_out.empty()) {
                io::save_relative_motion(relative_motion(seq, o->reference), o->relative_out);
                ctx.output(o->relative_out);
            }
            ctx.report["samples"] = seq.samples.size();
            ctx.report["nominal_rate_hz"] = seq.nominal_rate_hz;
        };
    });
}

struct MotionInput {
    std::string motion;
    std::string frame_transform;
    double rate = 0.0;

    void add(CLI::App* cmd) {
        cmd->add_option("--motion", motion, "Relative-motion CSV")->required();
        cmd->add_option("--frame-transform", frame_transform,
                        "Transform JSON mapping anatomy to motion coordinates (e.g. from 'register axes')")
            ;
        cmd->add_option("--rate-hz", rate, "Resample the motion at this rate first (0 = as recorded)")
            ->check(CLI::NonNegativeNumber)->capture_default_str();
    }
    RelativeMotion load() const { return anatomy_motion(motion, frame_transform, rate); }
};

void add_animate(CLI::App& app, Context& ctx, std::function<void()>& action) {
    struct Opts {
        MotionInput in;
        std::string mesh, out_dir, frames, format = "ply", motion_out;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand("animate", "Pose a mesh by every (or selected) motion frame");
    o->in.add(cmd);
    cmd->add_option("--mesh", o->mesh, "Mesh to move")->required();
    cmd->add_option("--out-dir", o->out_dir, "Directory for frame_NNNNN meshes")->required();
    cmd->add_option("--frames", o->frames, "Comma-separated frame indices (default all)");
    cmd->add_option("--format", o->format, "Mesh format")
        ->check(CLI::IsMember({"ply", "obj", "stl", "stl-ascii"}))->capture_default_str();
    cmd->add_option("--motion-out", o->motion_out, "Write the motion actually applied");
    cmd->callback([&ctx, &action, o] {
        action = [&ctx, o] {
            const RelativeMotion rm = o->in.load();
            std::vector<std::size_t> frames = parse_frames(o->frames);
            const TriangleMesh mesh = io::load_mesh(o->mesh);
            const std::vector<TriangleMesh> posed = apply_motion(mesh, rm, frames, ctx.par);
            if (frames.empty()) {
                for (std::size_t i = 0; i < rm.size(); ++i) frames.push_back(i);
            }
            const fs::path dir(o->out_dir);
            ensure_dir(dir);
            for (std::size_t i = 0; i < posed.size(); ++i) {
                char name[32];
                std::snprintf(name, sizeof name, "frame_%05zu", frames[i]);
                save_mesh_as(ctx, posed[i], dir / (name + mesh_extension(o->format)), o->format);
            }
            if (!o->motion_out.empty()) {
                io::save_relative_motion(rm, o->motion_out);
                ctx.output(o->motion_out);
            }
        };
    });
}

void add_contact(CLI::App& app, Context& ctx, std::function<void()>& action) {
    auto* contact = app.add_subcommand("contact", "Proximity contact analysis");
    contact->require_subcommand(1);

    auto add_params = [](CLI::App* cmd, ContactParams& p, bool& keep_interior) {
        cmd->add_option("--threshold-mm", p.threshold_mm, "Contact distance threshold")
            ->check(CLI::PositiveNumber)->capture_default_str();
        cmd->add_flag("--keep-interior", keep_interior, "Do not exclude pairs whose segment passes through a body");
    };

    struct MapOpts {
        std::string a, b, out, motion, frame_transform;
        std::size_t frame = 0;
        ContactParams params;
        bool keep_interior = false;
    };
    auto mo = std::make_shared<MapOpts>();
    auto* map = contact->add_subcommand("map", "Classify every vertex of mesh A against mesh B");
    map->add_option("--a", mo->a, "Mesh A (classified; moved by --motion)")->required();
    map->add_option("--b", mo->b, "Mesh B")->required();
    map->add_option("--out", mo->out, "Contact map CSV")->required();
    auto* mopt = map->add_option("--motion", mo->motion, "Relative-motion CSV posing mesh A");
    map->add_option("--frame", mo->frame, "Motion frame index")->needs(mopt)->capture_default_str();
    map->add_option("--frame-transform", mo->frame_transform, "Transform JSON mapping anatomy to motion coordinates")
        ->needs(mopt);
    add_params(map, mo->params, mo->keep_interior);
    map->callback([&ctx, &action, mo] {
        action = [&ctx, mo] {
            mo->params.exclude_interior = !mo->keep_interior;
            mo->params.check();
            TriangleMesh a = io::load_mesh(mo->a);
            if (!mo->motion.empty()) {
                const RelativeMotion rm = anatomy_motion(mo->motion, mo->frame_transform, 0.0);
                a = apply_motion(a, rm, {mo->frame}, ctx.par).front();
            }
            const SpatialIndex b(io::load_mesh(mo->b));
            const ContactMap m = contact_map(a, b, mo->params, ctx.par);
            io::write_file(mo->out, io::format_contact_map(m));
            ctx.output(mo->out);
            ctx.report["area_mm2"] = m.area;
            ctx.report["contact_vertices"] = m.contact_count();
            ctx.report["min_distance_mm"] = m.min_distance;
        };
    });

    struct SeriesOpts {
        MotionInput in;
        std::string moving, fixed, out;
        ContactParams params;
        bool keep_interior = false;
    };
    auto so = std::make_shared<SeriesOpts>();
    auto* series = contact->add_subcommand("series", "Contact area and centroid for every motion frame");
    series->add_option("--moving", so->moving, "Mesh moved by the motion")->required();
    series->add_option("--static", so->fixed, "Static mesh")->required();
    series->add_option("--out", so->out, "Contact series CSV")->required();
    so->in.add(series);
    add_params(series, so->params, so->keep_interior);
    series->callback([&ctx, &action, so] {
        action = [&ctx, so] {
            so->params.exclude_interior = !so->keep_interior;
            so->params.check();
            const RelativeMotion rm = so->in.load();
            const ContactSeries s =
                contact_series(io::load_mesh(so->moving), io::load_mesh(so->fixed), rm, so->params, ctx.par);
            io::write_file(so->out, io::format_contact_series(s));
            ctx.output(so->out);
            ctx.report["frames"] = s.size();
        };
    });
}

void write_image(Context& ctx, const ProjectionImage& img, const std::string& pgm, const std::string& csv) {
    io::write_file(pgm, io::format_pgm(img));
    ctx.output(pgm);
    if (!csv.empty()) {
        io::write_file(csv, io::format_image_csv(img));
        ctx.output(csv);
    }
    ctx.report["max_value"] = img.max_value();
    ctx.report["invalid_pixels"] = img.invalid;
}

void add_drr(CLI::App& app, Context& ctx, std::function<void()>& action) {
    auto* drr = app.add_subcommand("drr", "Digitally reconstructed radiographs");
    drr->require_subcommand(1);

    struct VoxelOpts {
        std::string volume, camera, out, csv;
    };
    auto vo = std::make_shared<VoxelOpts>();
    auto* voxel = drr->add_subcommand("voxel", "Line integrals through a voxel volume");
    voxel->add_option("--volume", vo->volume, "Volume header")->required();
    voxel->add_option("--camera", vo->camera, "Camera JSON")->required();
    voxel->add_option("--out", vo->out, "PGM image")->required();
    voxel->add_option("--csv", vo->csv, "Also write raw values as CSV");
    voxel->callback([&ctx, &action, vo] {
        action = [&ctx, vo] {
            const ProjectionImage img = drr_voxel(io::load_volume(vo->volume), io::load_camera(vo->camera), ctx.par);
            write_image(ctx, img, vo->out, vo->csv);
        };
    });

    struct SurfaceOpts {
        std::vector<std::string> meshes;
        std::vector<double> mu;
        std::string camera, out, csv;
    };
    auto so = std::make_shared<SurfaceOpts>();
    auto* surface = drr->add_subcommand("surface", "Line integrals through closed meshes of uniform attenuation");
    surface->add_option("--mesh", so->meshes, "Closed mesh (repeatable)")->required();
    surface->add_option("--mu", so->mu, "Attenuation per mm, one per mesh")->required()->check(CLI::NonNegativeNumber);
    surface->add_option("--camera", so->camera, "Camera JSON")->required();
    surface->add_option("--out", so->out, "PGM image")->required();
    surface->add_option("--csv", so->csv, "Also write raw values as CSV");
    surface->callback([&ctx, &action, so] {
        if (so->meshes.size() != so->mu.size()) {
            throw CLI::ValidationError("--mu", "give exactly one --mu per --mesh");
        }
        action = [&ctx, so] {
            std::vector<AttenuatedBody> bodies;
            for (std::size_t i = 0; i < so->meshes.size(); ++i) {
                bodies.push_back({io::load_mesh(so->meshes[i]), so->mu[i]});
            }
            const ProjectionImage img = drr_surface(bodies, io::load_camera(so->camera), ctx.par);
            write_image(ctx, img, so->out, so->csv);
        };
    });
}

void add_isosurface(CLI::App& app, Context& ctx, std::function<void()>& action) {
    struct Opts {
        std::string volume, out;
        double iso = 0.0;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand("isosurface", "Extract an isosurface from a volume");
    cmd->add_option("--volume", o->volume, "Volume header")->required();
    cmd->add_option("--iso", o->iso, "Iso level")->required();
    cmd->add_option("--out", o->out, "Output mesh (format from extension)")->required();
    cmd->callback([&ctx, &action, o] {
        action = [&ctx, o] {
            const TriangleMesh m = extract_isosurface(io::load_volume(o->volume), o->iso);
            io::save_mesh(m, o->out);
            ctx.output(o->out);
            ctx.report["faces"] = m.faces.size();
            ctx.report["watertight"] = is_watertight(m);
        };
    });
}

void add_info(CLI::App& app, Context& ctx, std::function<void()>& action) {
    auto file = std::make_shared<std::string>();
    auto* cmd = app.add_subcommand("info", "Summarize a mesh, volume, motion, landmark or transform file");
    cmd->add_option("file", *file, "Input file")->required();
    cmd->callback([&ctx, &action, file] {
        action = [&ctx, file] {
            const fs::path p(*file);
            std::string ext = p.extension().string();
            std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
            Json& r = ctx.report;
            if (ext == ".ply" || ext == ".obj" || ext == ".stl") {
                const TriangleMesh m = io::load_mesh(p);
                const BoundingBox b = bounds(m);
                r["type"] = "mesh";
                r["vertices"] = m.vertices.size();
                r["faces"] = m.faces.size();
                r["watertight"] = is_watertight(m);
                r["surface_area_mm2"] = m.surface_area();
                r["volume_mm3"] = m.signed_volume();
                r["bounds"] = {{b.lo.x(), b.lo.y(), b.lo.z()}, {b.hi.x(), b.hi.y(), b.hi.z()}};
            } else if (ext == ".vol") {
                const VoxelVolume v = io::load_volume(p);
                r["type"] = "volume";
                r["dims"] = v.dims;
                r["spacing"] = {v.spacing.x(), v.spacing.y(), v.spacing.z()};
                r["origin"] = {v.origin.x(), v.origin.y(), v.origin.z()};
            } else if (ext == ".json") {
                r["type"] = "transform";
                const ScrewAxis s = to_screw(io::load_transform(p));
                r["angle_deg"] = s.angle * 180.0 / 3.14159265358979323846;
                r["slide_mm"] = s.slide;
            } else if (ext == ".csv") {
                const std::string text = io::read_file(p);
                const std::string first = text.substr(0, text.find('\n'));
                if (first.rfind(io::kMotionHeader, 0) == 0) {
                    const MotionSequence s = io::parse_motion(text);
                    r["type"] = "motion";
                    r["samples"] = s.samples.size();
                    r["nominal_rate_hz"] = s.nominal_rate_hz;
                } else if (first.rfind(io::kRelativeMotionHeader, 0) == 0) {
                    r["type"] = "relative-motion";
                    r["frames"] = io::parse_relative_motion(text).size();
                } else {
                    r["type"] = "landmarks";
                    r["landmarks"] = io::parse_landmarks(text).size();
                }
            } else {
                throw UsageError("cannot tell the type of " + p.string() + " from its extension");
            }
            std::cout << r.dump(2) << '\n';
        };
    });
}

void write_report(const std::string& path, const Json& report) {
    if (path.empty()) return;
    try {
        io::write_file(path, report.dump(2) + "\n");
    } catch (const IoError& e) {
        std::cerr << "mandikin: warning: " << e.what() << '\n';
    }
}

}  // namespace

int run(const std::vector<std::string>& args) {
    Context ctx;
    std::function<void()> action;
    std::string report_path;

    CLI::App app("Jaw-motion and anatomy fusion toolkit", "mandikin");
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--jobs", ctx.par.jobs, "Worker threads for parallel kernels (0 = all)")
        ->check(CLI::NonNegativeNumber)->capture_default_str();
    app.add_option("--report", report_path, "Write a JSON run summary here");
    add_synth(app, ctx, action);
    add_register(app, ctx, action);
    add_stabilize(app, ctx, action);
    add_animate(app, ctx, action);
    add_contact(app, ctx, action);
    add_drr(app, ctx, action);
    add_isosurface(app, ctx, action);
    add_info(app, ctx, action);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    } catch (const CLI::ParseError& e) {
        std::cerr << "mandikin: error: " << e.what() << '\n';
        return kUsage;
    }

    std::string command;
    for (const CLI::App* sub = &app; !sub->get_subcommands().empty();) {
        sub = sub->get_subcommands().front();
        command += (command.empty() ? "" : " ") + sub->get_name();
    }
    ctx.report["command"] = command;
    ctx.report["outputs"] = Json::array();

    auto fail = [&](int code, const std::string& msg) {
        std::cerr << "mandikin: error: " << msg << '\n';
        ctx.report["ok"] = false;
        ctx.report["exit_code"] = code;
        ctx.report["error"] = msg;
        write_report(report_path, ctx.report);
        return code;
    };
    try {
        action();
    } catch (const UsageError& e) {
        return fail(kUsage, e.what());
    } catch (const IoError& e) {
        return fail(kIo, e.what());
    } catch (const NumericError& e) {
        return fail(kNumeric, e.what());
    } catch (const std::exception& e) {
        return fail(kNumeric, e.what());
    }
    ctx.report["ok"] = true;
    ctx.report["exit_code"] = 0;
    write_report(report_path, ctx.report);
    return kOk;
}

}  // namespace mandikin::cli
