#include "doctest.h"

#include "fuzz.hpp"
#include "oracles.hpp"

#include "mandikin/error.hpp"
#include "mandikin/io.hpp"
#include "mandikin/synth.hpp"

#include <bit>
#include <cstring>
#include <filesystem>

using namespace mandikin;

namespace {

constexpr int kRoundTrips = 1000;

using fuzz::mutate;
using fuzz::random_double;
using fuzz::random_mesh;
using fuzz::random_motion;

// Face-by-face corner positions; independent of vertex order and welding.
void check_same_triangles(const TriangleMesh& a, const TriangleMesh& b) {
    REQUIRE(a.faces.size() == b.faces.size());
    for (std::size_t f = 0; f < a.faces.size(); ++f) {
        for (int k = 0; k < 3; ++k) CHECK(a.vertices[a.faces[f][k]] == b.vertices[b.faces[f][k]]);
    }
}

// Parsing a mutated file either succeeds or throws IoError; nothing else escapes.
template <typename Parse>
void mutation_fuzz(const std::string& valid, Parse parse, std::mt19937_64& rng, int n = 300) {
    int rejected = 0;
    for (int i = 0; i < n; ++i) {
        const std::string bad = mutate(valid, rng);
        try {
            parse(bad);
        } catch (const IoError& e) {
            CHECK(std::string(e.what()).size() > 0);
            ++rejected;
        } catch (const std::exception& e) {
            FAIL_CHECK("unstructured error: " << e.what());
        }
    }
    CHECK(rejected > 0);
}

std::filesystem::path temp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("mandikin_io_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("decimal formatting round-trips every double") {
    std::mt19937_64 rng(81);
    for (int i = 0; i < 20000; ++i) {
        double v = std::bit_cast<double>(rng());
        if (!std::isfinite(v)) continue;
        if (i % 2) v = random_double(rng);
        const std::string a = io::format_decimal(v), b = io::format_sig17(v);
        CHECK(std::strtod(a.c_str(), nullptr) == v);
        CHECK(std::strtod(b.c_str(), nullptr) == v);
        CHECK(a.find_first_of("eE") == std::string::npos);
        CHECK(b.find_first_of("eE") == std::string::npos);
    }
    CHECK(io::format_decimal(0.5) == "0.5");
    CHECK(io::format_decimal(-3.0) == "-3");
    CHECK(io::format_sig17(1.0) == "1.0000000000000000");
    CHECK_THROWS_AS(io::format_decimal(std::nan("")), NumericError);
}

TEST_CASE("mesh format selection") {
    CHECK(io::mesh_format_for("a/b.ply") == io::MeshFormat::ply_ascii);
    CHECK(io::mesh_format_for("x.OBJ") == io::MeshFormat::obj);
    CHECK(io::mesh_format_for("x.stl") == io::MeshFormat::stl_binary);
    CHECK_THROWS_AS(io::mesh_format_for("x.off"), IoError);
    const TriangleMesh cube = synth::make_box(Vec3::Zero(), Vec3::Ones(), 2);
    CHECK(io::detect_stl_format(io::format_mesh(cube, io::MeshFormat::stl_binary)) == io::MeshFormat::stl_binary);
    CHECK(io::detect_stl_format(io::format_mesh(cube, io::MeshFormat::stl_ascii)) == io::MeshFormat::stl_ascii);
}

TEST_CASE("mesh examples") {
    const std::string ply =
        "ply\nformat ascii 1.0\ncomment unit square\nelement vertex 4\nproperty float x\nproperty float y\n"
        "property float z\nelement face 1\nproperty list uchar int vertex_indices\nend_header\n"
        "0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n";
    const TriangleMesh quad = io::parse_mesh(ply, io::MeshFormat::ply_ascii);
    CHECK(quad.vertices.size() == 4);
    CHECK(quad.faces.size() == 2);
    CHECK(quad.surface_area() == doctest::Approx(1.0));

    const std::string obj = "# tri\nv 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1\nf -3 -2 -1\n";
    const TriangleMesh tri = io::parse_mesh(obj, io::MeshFormat::obj);
    CHECK(tri.faces.size() == 2);
    CHECK(tri.faces[1] == Face{0, 1, 2});
    CHECK_THROWS_WITH_AS(io::parse_mesh("v 0 0 0\nf 0 1 2\n", io::MeshFormat::obj), doctest::Contains("line 2"), IoError);

    const std::string stl = "solid t\nfacet normal 0 0 1\nouter loop\nvertex 0 0 0\nvertex 1 0 0\nvertex 0 1 0\n"
                            "endloop\nendfacet\nendsolid t\n";
    const TriangleMesh s = io::parse_mesh(stl, io::MeshFormat::stl_ascii);
    CHECK(s.vertices.size() == 3);
    CHECK(s.faces.size() == 1);
    CHECK_THROWS_WITH_AS(io::parse_mesh(std::string(90, '\0'), io::MeshFormat::stl_binary),
                         doctest::Contains("offset"), IoError);
}

TEST_CASE("mesh writers round-trip exactly") {
    std::mt19937_64 rng(82);
    for (int i = 0; i < kRoundTrips; ++i) {
        const TriangleMesh ply = random_mesh(rng, false, i % 2 == 0);
        const TriangleMesh ply_back = io::parse_mesh(io::format_mesh(ply, io::MeshFormat::ply_ascii), io::MeshFormat::ply_ascii);
        CHECK(ply_back.vertices == ply.vertices);
        CHECK(ply_back.faces == ply.faces);
        CHECK(ply_back.normals == ply.normals);

        const TriangleMesh obj = random_mesh(rng, false, false);
        const TriangleMesh obj_back = io::parse_mesh(io::format_mesh(obj, io::MeshFormat::obj), io::MeshFormat::obj);
        CHECK(obj_back.vertices == obj.vertices);
        CHECK(obj_back.faces == obj.faces);

        // STL stores float32 triangle soup: exact for float-representable corners.
        const TriangleMesh stl = random_mesh(rng, true, false);
        for (const auto format : {io::MeshFormat::stl_binary, io::MeshFormat::stl_ascii}) {
            const std::string bytes = io::format_mesh(stl, format);
            CHECK(io::detect_stl_format(bytes) == format);
            check_same_triangles(stl, io::parse_mesh(bytes, format));
        }
    }
}

TEST_CASE("malformed meshes give structured errors") {
    std::mt19937_64 rng(83);
    const TriangleMesh m = random_mesh(rng, true, true);
    for (const auto format : {io::MeshFormat::ply_ascii, io::MeshFormat::obj, io::MeshFormat::stl_ascii,
                              io::MeshFormat::stl_binary}) {
        const std::string valid = io::format_mesh(m, format);
        mutation_fuzz(valid, [&](const std::string& s) { validate(io::parse_mesh(s, format)); }, rng);
    }
    CHECK_THROWS_AS(io::parse_mesh("", io::MeshFormat::ply_ascii), IoError);
    CHECK_THROWS_AS(io::parse_mesh("v 0 0 0\nv 1 0 0\nv 2 0 0\nf 1 2 3\n", io::MeshFormat::obj), IoError);
}

TEST_CASE("mesh files on disk") {
    const auto dir = temp_dir("mesh");
    const TriangleMesh cube = synth::make_box(Vec3::Zero(), Vec3(1, 2, 3), 1);
    for (const char* name : {"c.ply", "c.obj", "c.stl"}) {
        io::save_mesh(cube, dir / name);
        const TriangleMesh back = io::load_mesh(dir / name);
        CHECK(is_watertight(back));
        CHECK(back.signed_volume() == doctest::Approx(6.0).epsilon(1e-12));
    }
    io::save_mesh(cube, dir / "a.stl", io::MeshFormat::stl_ascii);
    CHECK(io::load_mesh(dir / "a.stl").faces.size() == cube.faces.size());
    CHECK_THROWS_WITH_AS(io::load_mesh(dir / "missing.ply"), doctest::Contains("missing.ply"), IoError);
}

TEST_CASE("motion CSV") {
    std::mt19937_64 rng(84);
    for (int i = 0; i < kRoundTrips; ++i) {
        const MotionSequence seq = random_motion(rng);
        const MotionSequence back = io::parse_motion(io::format_motion(seq));
        REQUIRE(back.samples.size() == seq.samples.size());
        for (std::size_t k = 0; k < seq.samples.size(); ++k) {
            CHECK(back.samples[k].time == seq.samples[k].time);
            CHECK(back.samples[k].upper.points == seq.samples[k].upper.points);
            CHECK(back.samples[k].lower.points == seq.samples[k].lower.points);
        }
    }
    const std::string valid = io::format_motion(random_motion(rng));
    CHECK(valid.rfind(std::string(io::kMotionHeader), 0) == 0);
    mutation_fuzz(valid, [](const std::string& s) { io::parse_motion(s); }, rng);
    const std::string h = std::string(io::kMotionHeader) + "\n";
    const std::string row = ",0,0,0,1,0,0,0,1,0,0,0,0,1,0,0,0,1,0\n";
    CHECK_THROWS_WITH_AS(io::parse_motion(h), doctest::Contains("no samples"), IoError);
    CHECK_THROWS_WITH_AS(io::parse_motion(h + "0.1" + row + "0.1" + row), doctest::Contains("line 3"), IoError);
    CHECK_THROWS_AS(io::parse_motion(h + "-1" + row), IoError);
    CHECK_THROWS_AS(io::parse_motion("t,x\n0,1\n"), IoError);
    const MotionSequence two = io::parse_motion(h + "0" + row + "0.5" + row);
    CHECK(two.nominal_rate_hz == doctest::Approx(2.0));
}

TEST_CASE("relative motion CSV") {
    std::mt19937_64 rng(85);
    for (int i = 0; i < kRoundTrips; ++i) {
        RelativeMotion rm;
        std::uniform_int_distribution<int> count(1, 10);
        const int n = count(rng);
        for (int k = 0; k < n; ++k) {
            rm.times.push_back(0.01 * k);
            rm.transforms.push_back(oracle::random_transform(rng));
        }
        const RelativeMotion back = io::parse_relative_motion(io::format_relative_motion(rm));
        REQUIRE(back.size() == rm.size());
        for (int k = 0; k < n; ++k) {
            CHECK(back.times[k] == rm.times[k]);
            CHECK(back.transforms[k].rotation == rm.transforms[k].rotation);
            CHECK(back.transforms[k].translation == rm.transforms[k].translation);
        }
    }
    RelativeMotion rm;
    rm.times = {0.0, 0.5};
    rm.transforms = {RigidTransform::identity(), oracle::random_transform(rng)};
    mutation_fuzz(io::format_relative_motion(rm), [](const std::string& s) { io::parse_relative_motion(s); }, rng);
    const std::string h = std::string(io::kRelativeMotionHeader) + "\n";
    CHECK_THROWS_AS(io::parse_relative_motion(h + "0,2,0,0,0,1,0,0,0,1,0,0,0\n"), IoError);
    // A rotation a little off orthonormal is projected, not rejected.
    const RelativeMotion near = io::parse_relative_motion(h + "0,1.0000001,0,0,0,1,0,0,0,1,0,0,0\n");
    CHECK(is_valid(near.transforms[0]));
}

TEST_CASE("landmark CSV") {
    std::mt19937_64 rng(86);
    for (int i = 0; i < kRoundTrips; ++i) {
        io::LandmarkSet set;
        std::uniform_int_distribution<int> count(0, 8);
        const int n = count(rng);
        for (int k = 0; k < n; ++k) {
            set.push_back({"pt_" + std::to_string(k) + (k % 2 ? " mid" : ""),
                           Vec3(random_double(rng), random_double(rng), random_double(rng))});
        }
        const io::LandmarkSet back = io::parse_landmarks(io::format_landmarks(set));
        REQUIRE(back.size() == set.size());
        for (int k = 0; k < n; ++k) {
            CHECK(back[k].name == set[k].name);
            CHECK(back[k].position == set[k].position);
        }
    }
    const io::LandmarkSet noheader = io::parse_landmarks("a,1,2,3\nb,4,5,6\n");
    CHECK(noheader.size() == 2);
    CHECK(io::parse_landmarks("").empty());
    CHECK_THROWS_WITH_AS(io::parse_landmarks("a,1,2,3\na,4,5,6\n"), doctest::Contains("line 2"), IoError);
    CHECK_THROWS_AS(io::format_landmarks({{"a,b", Vec3::Zero()}}), UsageError);
    mutation_fuzz(io::format_landmarks({{"a", Vec3(1, 2, 3)}, {"b", Vec3(4, 5, 6)}, {"c", Vec3(7, 8, 9)}}),
                  [](const std::string& s) { io::parse_landmarks(s); }, rng);

    const io::LandmarkSet src = {{"a", Vec3(0, 0, 0)}, {"b", Vec3(1, 0, 0)}, {"c", Vec3(0, 1, 0)}, {"d", Vec3(0, 0, 1)}};
    const io::LandmarkSet tgt = {{"c", Vec3(0, 2, 0)}, {"a", Vec3(0, 0, 2)}, {"b", Vec3(2, 0, 0)}};
    const CorrespondenceSet c = io::match_landmarks(src, tgt);
    REQUIRE(c.size() == 3);
    CHECK(c.source[0] == Vec3(0, 0, 0));
    CHECK(c.target[0] == Vec3(0, 0, 2));
    CHECK_THROWS_AS(io::match_landmarks(src, {tgt[0], tgt[1]}), IoError);
}

TEST_CASE("transform JSON") {
    std::mt19937_64 rng(87);
    for (int i = 0; i < kRoundTrips; ++i) {
        const RigidTransform t = oracle::random_transform(rng);
        const RigidTransform back = io::parse_transform(io::format_transform(t, {0.25, 12, 40}));
        CHECK(back.rotation == t.rotation);
        CHECK(back.translation == t.translation);
    }
    const std::string text = io::format_transform(RigidTransform::identity(), {0.5, 3, 10});
    CHECK(text.find("\"rms_mm\"") != std::string::npos);
    mutation_fuzz(text, [](const std::string& s) { io::parse_transform(s); }, rng);
    CHECK_THROWS_AS(io::parse_transform("{\"rotation\": [[1,0,0],[0,1,0]], \"translation\": [0,0,0]}"), IoError);
    CHECK_THROWS_AS(io::parse_transform("{\"rotation\": [[2,0,0],[0,1,0],[0,0,1]], \"translation\": [0,0,0]}"), IoError);
    CHECK_THROWS_AS(io::parse_transform("[]"), IoError);
}

TEST_CASE("camera JSON") {
    std::mt19937_64 rng(88);
    for (int i = 0; i < kRoundTrips; ++i) {
        ProjectionCamera cam;
        const Mat3 r = oracle::random_rotation(rng);
        cam.u_axis = r.col(0);
        cam.v_axis = r.col(1);
        cam.detector_origin = oracle::random_vec(rng, 100);
        cam.width = 1 + rng() % 500;
        cam.height = 1 + rng() % 500;
        cam.pitch = 0.1 + (rng() % 100) * 0.01;
        if (i % 2) {
            cam.mode = ProjectionMode::point_source;
            cam.source = cam.detector_origin + 300 * r.col(2);
        }
        const ProjectionCamera back = io::parse_camera(io::format_camera(cam));
        CHECK(back.mode == cam.mode);
        CHECK(back.detector_origin == cam.detector_origin);
        CHECK(back.u_axis == cam.u_axis);
        CHECK(back.v_axis == cam.v_axis);
        CHECK(back.width == cam.width);
        CHECK(back.height == cam.height);
        CHECK(back.pitch == cam.pitch);
        if (cam.mode == ProjectionMode::point_source) CHECK(back.source == cam.source);
    }
    ProjectionCamera cam;
    cam.width = 4;
    mutation_fuzz(io::format_camera(cam), [](const std::string& s) { io::parse_camera(s); }, rng);
    CHECK_THROWS_WITH_AS(io::parse_camera(
                             "{\"mode\":\"parallel\",\"detector_origin\":[0,0,0],\"u_axis\":[1,0,0],"
                             "\"v_axis\":[1,0,0],\"width\":2,\"height\":2,\"pitch\":1}"),
                         doctest::Contains("camera"), IoError);
}

TEST_CASE("volume header and data") {
    std::mt19937_64 rng(89);
    for (int i = 0; i < kRoundTrips; ++i) {
        io::VolumeHeader h;
        h.dims = {1 + rng() % 8, 1 + rng() % 8, 1 + rng() % 8};
        h.spacing = Vec3(0.1 + (rng() % 50) * 0.1, std::abs(random_double(rng)) + 0.01, 1.0);
        h.origin = Vec3(random_double(rng), random_double(rng), random_double(rng));
        h.data = "v" + std::to_string(i) + ".raw";
        const io::VolumeHeader back = io::parse_volume_header(io::format_volume_header(h));
        CHECK(back.dims == h.dims);
        CHECK(back.spacing == h.spacing);
        CHECK(back.origin == h.origin);
        CHECK(back.data == h.data);

        VoxelVolume v = VoxelVolume::filled(h.dims, h.spacing, h.origin);
        for (double& x : v.values) x = static_cast<float>(random_double(rng));
        const VoxelVolume vb = io::decode_volume(h, io::encode_volume_values(v));
        CHECK(vb.values == v.values);
    }
    io::VolumeHeader h;
    h.dims = {2, 2, 2};
    h.spacing = Vec3::Ones();
    h.origin = Vec3::Zero();
    h.data = "x.raw";
    mutation_fuzz(io::format_volume_header(h), [](const std::string& s) { io::parse_volume_header(s); }, rng);
    CHECK_THROWS_WITH_AS(io::decode_volume(h, std::string(31, '\0')), doctest::Contains("size mismatch"), IoError);

    const auto dir = temp_dir("vol");
    VoxelVolume v = VoxelVolume::filled({3, 4, 5}, Vec3(0.5, 1, 2), Vec3(1, 2, 3), 0.25);
    v.at(1, 2, 3) = 0.75;
    io::save_volume(v, dir / "scan.vol");
    CHECK(std::filesystem::exists(dir / "scan.raw"));
    const VoxelVolume back = io::load_volume(dir / "scan.vol");
    CHECK(back.values == v.values);
    CHECK(back.origin == v.origin);
}

TEST_CASE("image outputs") {
    ProjectionImage img;
    img.width = 3;
    img.height = 2;
    img.values = {0.0, 0.1, 0.2, 0.3, 0.4, 0.6};
    const std::string pgm = io::format_pgm(img);
    CHECK(pgm.rfind("P2\n# scale ", 0) == 0);
    CHECK(pgm.find("\n3 2\n65535\n") != std::string::npos);
    CHECK(pgm.find("0 10923 21845\n") != std::string::npos);
    CHECK(pgm.find("32768 43690 65535\n") != std::string::npos);

    std::mt19937_64 rng(90);
    for (int i = 0; i < kRoundTrips; ++i) {
        ProjectionImage r;
        r.width = 1 + rng() % 6;
        r.height = 1 + rng() % 6;
        for (std::size_t k = 0; k < r.width * r.height; ++k) r.values.push_back(random_double(rng));
        const ProjectionImage back = io::parse_image_csv(io::format_image_csv(r));
        CHECK(back.width == r.width);
        CHECK(back.height == r.height);
        CHECK(back.values == r.values);
    }
    mutation_fuzz(io::format_image_csv(img), [](const std::string& s) { io::parse_image_csv(s); }, rng);
}

TEST_CASE("contact outputs") {
    ContactMap m;
    m.classes = {ContactClass::free, ContactClass::contact, ContactClass::excluded_interior};
    m.distance = {1.5, 0.25, -0.5};
    m.penetrating = {false, false, true};
    const std::string text = io::format_contact_map(m);
    CHECK(text == "vertex_id,distance_mm,class\n0,1.5,free\n1,0.25,contact\n2,-0.5,excluded-interior\n");
    const ContactSeries s = {{0.0, 2.5, 0.1, Vec3(1, 2, 3)}, {0.5, 0.0, 0.75, std::nullopt}};
    CHECK(io::format_contact_series(s) ==
          "t,area_mm2,min_distance_mm,cx,cy,cz\n0,2.5,0.1,1,2,3\n0.5,0,0.75,,,\n");
}

}  // TEST_SUITE
