#include "mandikin/io.hpp"

#include "text.hpp"

#include "json.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>

namespace mandikin::io {

using detail::fail;
using detail::Line;
using detail::parse_count;
using detail::parse_double;
using detail::split_char;
using detail::split_lines;
using detail::split_whitespace;
using detail::trim;

using Json = nlohmann::json;

namespace {

bool blank(std::string_view s) { return trim(s).empty(); }

std::string to_fixed(double v, int precision) {
    char buf[768];
    const auto r = precision < 0 ? std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed)
                                 : std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, precision);
    if (r.ec != std::errc()) {
        throw NumericError("number formatting failed");
    }
    return std::string(buf, r.ptr);
}

void require_finite(double v) {
    if (!std::isfinite(v)) {
        throw NumericError("cannot write a non-finite value");
    }
}

std::vector<std::string_view> csv_fields(const Line& line, std::size_t expected, std::size_t row) {
    auto fields = split_char(line.text, ',');
    if (fields.size() != expected) {
        fail(line.number, "row " + std::to_string(row) + ": expected " + std::to_string(expected) + " columns, got " +
                              std::to_string(fields.size()));
    }
    for (auto& f : fields) f = trim(f);
    return fields;
}

// Data lines after the header, skipping blank lines.
std::vector<Line> data_lines(const std::vector<Line>& lines, std::size_t first) {
    std::vector<Line> out;
    for (std::size_t i = first; i < lines.size(); ++i) {
        if (!blank(lines[i].text)) out.push_back(lines[i]);
    }
    return out;
}

void check_time(double t, double prev, bool has_prev, const Line& line, std::size_t row) {
    if (t < 0.0) {
        fail(line.number, "row " + std::to_string(row) + ": negative timestamp");
    }
    if (has_prev && !(t > prev)) {
        fail(line.number, "row " + std::to_string(row) + ": timestamps must be strictly increasing");
    }
}

// ---------------------------------------------------------------- JSON helpers

Json parse_json(std::string_view text) {
    try {
        return Json::parse(text.begin(), text.end());
    } catch (const Json::exception& e) {
        throw IoError(std::string("invalid JSON: ") + e.what());
    }
}

double json_number(const Json& j, const std::string& what) {
    if (!j.is_number()) {
        throw IoError("'" + what + "' must be a number");
    }
    const double v = j.get<double>();
    if (!std::isfinite(v)) {
        throw IoError("'" + what + "' must be finite");
    }
    return v;
}

Vec3 json_vec3(const Json& obj, const char* key) {
    if (!obj.contains(key)) {
        throw IoError(std::string("missing key '") + key + "'");
    }
    const Json& j = obj.at(key);
    if (!j.is_array() || j.size() != 3) {
        throw IoError(std::string("'") + key + "' must be an array of 3 numbers");
    }
    return Vec3(json_number(j[0], key), json_number(j[1], key), json_number(j[2], key));
}

std::size_t json_count(const Json& obj, const char* key) {
    if (!obj.contains(key)) {
        throw IoError(std::string("missing key '") + key + "'");
    }
    const Json& j = obj.at(key);
    if (!j.is_number_integer() || j.get<long long>() < 1) {
        throw IoError(std::string("'") + key + "' must be a positive integer");
    }
    return static_cast<std::size_t>(j.get<long long>());
}

std::string vec_json(const Vec3& v) {
    return "[" + format_sig17(v.x()) + ", " + format_sig17(v.y()) + ", " + format_sig17(v.z()) + "]";
}

}  // namespace

// ---------------------------------------------------------------- numbers and files

std::string format_decimal(double v) {
    require_finite(v);
    return to_fixed(v, -1);
}

std::string format_sig17(double v) {
    require_finite(v);
    if (v == 0.0) {
        return to_fixed(v, 16);
    }
    const int exponent = static_cast<int>(std::floor(std::log10(std::abs(v))));
    return to_fixed(v, std::max(0, 16 - exponent));
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string() + " for reading");
    }
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw IoError("error reading " + path.string());
    }
    return bytes;
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("error writing " + path.string());
    }
}

// ---------------------------------------------------------------- volume

VolumeHeader parse_volume_header(std::string_view text) {
    const std::vector<Line> lines = split_lines(text);
    if (lines.empty() || lines[0].text != "MANDIKIN-VOL 1") {
        fail(1, "expected 'MANDIKIN-VOL 1'");
    }
    std::map<std::string, Line> fields;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (blank(lines[i].text)) continue;
        const auto colon = lines[i].text.find(':');
        if (colon == std::string_view::npos) fail(lines[i].number, "expected 'key: value'");
        const std::string key(trim(lines[i].text.substr(0, colon)));
        static const std::set<std::string> known{"dims", "spacing", "origin", "dtype", "data"};
        if (!known.count(key)) fail(lines[i].number, "unknown key '" + key.substr(0, 32) + "'");
        if (fields.count(key)) fail(lines[i].number, "duplicate key '" + key + "'");
        fields.emplace(key, Line{lines[i].number, trim(lines[i].text.substr(colon + 1))});
    }
    for (const char* key : {"dims", "spacing", "origin", "dtype", "data"}) {
        if (!fields.count(key)) {
            throw IoError(std::string("volume header: missing key '") + key + "'");
        }
    }
    auto triple = [&](const char* key) {
        const Line& l = fields.at(key);
        const auto tok = split_whitespace(l.text);
        if (tok.size() != 3) fail(l.number, std::string("'") + key + "' needs 3 values");
        return tok;
    };
    VolumeHeader h;
    const auto d = triple("dims");
    for (int a = 0; a < 3; ++a) {
        h.dims[a] = parse_count(d[a], fields.at("dims").number);
        if (h.dims[a] == 0) fail(fields.at("dims").number, "dims must be positive");
    }
    if (h.dims[0] > (1ULL << 40) / h.dims[1] / h.dims[2]) {
        fail(fields.at("dims").number, "dims are too large");
    }
    const auto s = triple("spacing");
    const auto o = triple("origin");
    for (int a = 0; a < 3; ++a) {
        h.spacing[a] = parse_double(s[a], fields.at("spacing").number);
        h.origin[a] = parse_double(o[a], fields.at("origin").number);
        if (!(h.spacing[a] > 0.0)) fail(fields.at("spacing").number, "spacing must be positive");
    }
    if (fields.at("dtype").text != "f32le") {
        fail(fields.at("dtype").number, "unknown dtype '" + std::string(fields.at("dtype").text.substr(0, 32)) + "'");
    }
    h.data = std::string(fields.at("data").text);
    if (h.data.empty()) fail(fields.at("data").number, "empty data path");
    return h;
}

std::string format_volume_header(const VolumeHeader& h) {
    std::ostringstream os;
    os << "MANDIKIN-VOL 1\n"
       << "dims: " << h.dims[0] << ' ' << h.dims[1] << ' ' << h.dims[2] << '\n'
       << "spacing: " << format_decimal(h.spacing.x()) << ' ' << format_decimal(h.spacing.y()) << ' '
       << format_decimal(h.spacing.z()) << '\n'
       << "origin: " << format_decimal(h.origin.x()) << ' ' << format_decimal(h.origin.y()) << ' '
       << format_decimal(h.origin.z()) << '\n'
       << "dtype: f32le\n"
       << "data: " << h.data << '\n';
    return os.str();
}

static_assert(std::endian::native == std::endian::little, "volume I/O assumes a little-endian host");

VoxelVolume decode_volume(const VolumeHeader& h, std::string_view raw) {
    const std::size_t count = h.dims[0] * h.dims[1] * h.dims[2];
    if (raw.size() != count * 4) {
        throw IoError("raw data size mismatch: " + std::to_string(raw.size()) + " bytes, expected " +
                      std::to_string(count * 4) + " for " + std::to_string(h.dims[0]) + "x" +
                      std::to_string(h.dims[1]) + "x" + std::to_string(h.dims[2]) + " float32 voxels");
    }
    VoxelVolume v;
    v.dims = h.dims;
    v.spacing = h.spacing;
    v.origin = h.origin;
    v.values.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        float f;
        std::memcpy(&f, raw.data() + 4 * i, 4);
        if (!std::isfinite(f)) {
            throw IoError("offset " + std::to_string(4 * i) + ": voxel value is not finite");
        }
        v.values[i] = f;
    }
    return v;
}

std::string encode_volume_values(const VoxelVolume& v) {
    v.check();
    std::string out(v.values.size() * 4, '\0');
    for (std::size_t i = 0; i < v.values.size(); ++i) {
        const auto f = static_cast<float>(v.values[i]);
        if (!std::isfinite(f)) {
            throw NumericError("voxel value does not fit in float32");
        }
        std::memcpy(out.data() + 4 * i, &f, 4);
    }
    return out;
}

VoxelVolume load_volume(const std::filesystem::path& header_path) {
    try {
        const VolumeHeader h = parse_volume_header(read_file(header_path));
        const std::filesystem::path raw = header_path.parent_path() / h.data;
        return decode_volume(h, read_file(raw));
    } catch (const IoError& e) {
        throw IoError(header_path.string() + ": " + e.what());
    }
}

void save_volume(const VoxelVolume& v, const std::filesystem::path& header_path) {
    VolumeHeader h;
    h.dims = v.dims;
    h.spacing = v.spacing;
    h.origin = v.origin;
    h.data = header_path.stem().string() + ".raw";
    const std::string raw = encode_volume_values(v);
    write_file(header_path.parent_path() / h.data, raw);
    write_file(header_path, format_volume_header(h));
}

// ---------------------------------------------------------------- motion

MotionSequence parse_motion(std::string_view text) {
    const std::vector<Line> lines = split_lines(text);
    if (lines.empty() || trim(lines[0].text) != kMotionHeader) {
        fail(1, "expected header '" + std::string(kMotionHeader) + "'");
    }
    MotionSequence seq;
    std::size_t row = 0;
    for (const Line& line : data_lines(lines, 1)) {
        ++row;
        const auto f = csv_fields(line, 19, row);
        MotionSample s;
        s.time = parse_double(f[0], line.number);
        check_time(s.time, seq.samples.empty() ? 0.0 : seq.samples.back().time, !seq.samples.empty(), line, row);
        for (int p = 0; p < 3; ++p) {
            for (int a = 0; a < 3; ++a) {
                s.upper.points[p][a] = parse_double(f[1 + 3 * p + a], line.number);
                s.lower.points[p][a] = parse_double(f[10 + 3 * p + a], line.number);
            }
        }
        seq.samples.push_back(s);
    }
    if (seq.samples.empty()) {
        throw IoError("motion file has no samples");
    }
    if (seq.samples.size() >= 2) {
        seq.nominal_rate_hz =
            static_cast<double>(seq.samples.size() - 1) / (seq.samples.back().time - seq.samples.front().time);
    }
    return seq;
}

std::string format_motion(const MotionSequence& seq) {
    seq.check();
    std::string out(kMotionHeader);
    out += '\n';
    for (const MotionSample& s : seq.samples) {
        out += format_decimal(s.time);
        for (const MarkerTriangle* tri : {&s.upper, &s.lower}) {
            for (const Vec3& p : tri->points) {
                for (int a = 0; a < 3; ++a) {
                    out += ',';
                    out += format_decimal(p[a]);
                }
            }
        }
        out += '\n';
    }
    return out;
}

MotionSequence load_motion(const std::filesystem::path& path) {
    try {
        return parse_motion(read_file(path));
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

void save_motion(const MotionSequence& seq, const std::filesystem::path& path) { write_file(path, format_motion(seq)); }

namespace {

// Accepts rotations orthonormal to 1e-9 unchanged; projects those within 1e-6.
Mat3 checked_rotation(const Mat3& r, const std::string& where) {
    const RigidTransform t{r, Vec3::Zero()};
    if (is_valid(t, 1e-9)) {
        return r;
    }
    if (is_valid(t, 1e-6)) {
        return nearest_rotation(r);
    }
    throw IoError(where + "rotation is not orthonormal with determinant +1");
}

}  // namespace

RelativeMotion parse_relative_motion(std::string_view text) {
    const std::vector<Line> lines = split_lines(text);
    if (lines.empty() || trim(lines[0].text) != kRelativeMotionHeader) {
        fail(1, "expected header '" + std::string(kRelativeMotionHeader) + "'");
    }
    RelativeMotion rm;
    std::size_t row = 0;
    for (const Line& line : data_lines(lines, 1)) {
        ++row;
        const auto f = csv_fields(line, 13, row);
        const double t = parse_double(f[0], line.number);
        check_time(t, rm.times.empty() ? 0.0 : rm.times.back(), !rm.times.empty(), line, row);
        RigidTransform x;
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) {
                x.rotation(r, c) = parse_double(f[1 + 3 * r + c], line.number);
            }
            x.translation[r] = parse_double(f[10 + r], line.number);
        }
        x.rotation = checked_rotation(x.rotation, "line " + std::to_string(line.number) + ": ");
        rm.times.push_back(t);
        rm.transforms.push_back(x);
    }
    if (rm.times.empty()) {
        throw IoError("relative motion file has no rows");
    }
    return rm;
}

std::string format_relative_motion(const RelativeMotion& rm) {
    if (rm.times.size() != rm.transforms.size()) {
        throw UsageError("relative motion times and transforms differ in length");
    }
    std::string out(kRelativeMotionHeader);
    out += '\n';
    for (std::size_t i = 0; i < rm.size(); ++i) {
        out += format_decimal(rm.times[i]);
        const RigidTransform& x = rm.transforms[i];
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) {
                out += ',';
                out += format_decimal(x.rotation(r, c));
            }
        }
        for (int r = 0; r < 3; ++r) {
            out += ',';
            out += format_decimal(x.translation[r]);
        }
        out += '\n';
    }
    return out;
}

RelativeMotion load_relative_motion(const std::filesystem::path& path) {
    try {
        return parse_relative_motion(read_file(path));
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

void save_relative_motion(const RelativeMotion& rm, const std::filesystem::path& path) {
    write_file(path, format_relative_motion(rm));
}

// ---------------------------------------------------------------- landmarks

LandmarkSet parse_landmarks(std::string_view text) {
    const std::vector<Line> lines = split_lines(text);
    std::size_t first = 0;
    while (first < lines.size() && blank(lines[first].text)) ++first;
    if (first < lines.size() && trim(lines[first].text) == "name,x,y,z") ++first;
    LandmarkSet set;
    std::set<std::string> names;
    std::size_t row = 0;
    for (const Line& line : data_lines(lines, first)) {
        ++row;
        const auto f = csv_fields(line, 4, row);
        if (f[0].empty()) fail(line.number, "row " + std::to_string(row) + ": empty landmark name");
        Landmark lm{std::string(f[0]),
                    Vec3(parse_double(f[1], line.number), parse_double(f[2], line.number), parse_double(f[3], line.number))};
        if (!names.insert(lm.name).second) {
            fail(line.number, "row " + std::to_string(row) + ": duplicate landmark name '" + lm.name.substr(0, 64) + "'");
        }
        set.push_back(std::move(lm));
    }
    return set;
}

std::string format_landmarks(const LandmarkSet& set) {
    std::string out = "name,x,y,z\n";
    std::set<std::string> names;
    for (const Landmark& lm : set) {
        if (lm.name.empty() || lm.name.find_first_of(",\r\n") != std::string::npos ||
            trim(lm.name) != std::string_view(lm.name)) {
            throw UsageError("landmark name '" + lm.name + "' cannot be written as CSV");
        }
        if (!names.insert(lm.name).second) {
            throw UsageError("duplicate landmark name '" + lm.name + "'");
        }
        out += lm.name;
        for (int a = 0; a < 3; ++a) {
            out += ',';
            out += format_decimal(lm.position[a]);
        }
        out += '\n';
    }
    return out;
}

LandmarkSet load_landmarks(const std::filesystem::path& path) {
    try {
        return parse_landmarks(read_file(path));
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

void save_landmarks(const LandmarkSet& set, const std::filesystem::path& path) {
    write_file(path, format_landmarks(set));
}

CorrespondenceSet match_landmarks(const LandmarkSet& source, const LandmarkSet& target) {
    std::map<std::string, Vec3> by_name;
    for (const Landmark& lm : target) by_name.emplace(lm.name, lm.position);
    CorrespondenceSet c;
    for (const Landmark& lm : source) {
        const auto it = by_name.find(lm.name);
        if (it != by_name.end()) {
            c.source.push_back(lm.position);
            c.target.push_back(it->second);
        }
    }
    if (c.size() < 3) {
        throw IoError("landmark sets share only " + std::to_string(c.size()) + " names; at least 3 are needed");
    }
    return c;
}

// ---------------------------------------------------------------- transforms

RigidTransform parse_transform(std::string_view json_text) {
    const Json j = parse_json(json_text);
    if (!j.is_object()) {
        throw IoError("transform JSON must be an object");
    }
    if (!j.contains("rotation")) {
        throw IoError("missing key 'rotation'");
    }
    const Json& r = j.at("rotation");
    if (!r.is_array() || r.size() != 3) {
        throw IoError("'rotation' must be 3 rows of 3 numbers");
    }
    RigidTransform t;
    for (int row = 0; row < 3; ++row) {
        if (!r[row].is_array() || r[row].size() != 3) {
            throw IoError("'rotation' must be 3 rows of 3 numbers");
        }
        for (int col = 0; col < 3; ++col) {
            t.rotation(row, col) = json_number(r[row][col], "rotation");
        }
    }
    t.translation = json_vec3(j, "translation");
    t.rotation = checked_rotation(t.rotation, "");
    return t;
}

std::string format_transform(const RigidTransform& t, const RegistrationReport& report) {
    std::ostringstream os;
    os << "{\n  \"rotation\": [\n";
    for (int r = 0; r < 3; ++r) {
        os << "    " << vec_json(t.rotation.row(r).transpose()) << (r < 2 ? ",\n" : "\n");
    }
    os << "  ],\n  \"translation\": " << vec_json(t.translation);
    if (report.rms_mm) os << ",\n  \"rms_mm\": " << format_sig17(*report.rms_mm);
    if (report.iterations) os << ",\n  \"iterations\": " << *report.iterations;
    if (report.correspondences) os << ",\n  \"correspondences\": " << *report.correspondences;
    os << "\n}\n";
    return os.str();
}

RigidTransform load_transform(const std::filesystem::path& path) {
    try {
        return parse_transform(read_file(path));
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

void save_transform(const RigidTransform& t, const std::filesystem::path& path, const RegistrationReport& report) {
    write_file(path, format_transform(t, report));
}

// ---------------------------------------------------------------- camera

ProjectionCamera parse_camera(std::string_view json_text) {
    const Json j = parse_json(json_text);
    if (!j.is_object()) {
        throw IoError("camera JSON must be an object");
    }
    ProjectionCamera cam;
    if (!j.contains("mode") || !j.at("mode").is_string()) {
        throw IoError("camera needs a string 'mode' (\"parallel\" or \"point\")");
    }
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "parallel") {
        cam.mode = ProjectionMode::parallel;
    } else if (mode == "point") {
        cam.mode = ProjectionMode::point_source;
        cam.source = json_vec3(j, "source");
    } else {
        throw IoError("unknown camera mode '" + mode.substr(0, 32) + "'");
    }
    cam.detector_origin = json_vec3(j, "detector_origin");
    cam.u_axis = json_vec3(j, "u_axis");
    cam.v_axis = json_vec3(j, "v_axis");
    cam.width = json_count(j, "width");
    cam.height = json_count(j, "height");
    if (!j.contains("pitch")) {
        throw IoError("missing key 'pitch'");
    }
    cam.pitch = json_number(j.at("pitch"), "pitch");
    try {
        cam.check();
    } catch (const UsageError& e) {
        throw IoError(std::string("camera: ") + e.what());
    }
    return cam;
}

std::string format_camera(const ProjectionCamera& cam) {
    std::ostringstream os;
    os << "{\n  \"mode\": \"" << (cam.mode == ProjectionMode::parallel ? "parallel" : "point") << "\",\n"
       << "  \"detector_origin\": " << vec_json(cam.detector_origin) << ",\n"
       << "  \"u_axis\": " << vec_json(cam.u_axis) << ",\n"
       << "  \"v_axis\": " << vec_json(cam.v_axis) << ",\n"
       << "  \"width\": " << cam.width << ",\n"
       << "  \"height\": " << cam.height << ",\n"
       << "  \"pitch\": " << format_sig17(cam.pitch);
    if (cam.mode == ProjectionMode::point_source) {
        os << ",\n  \"source\": " << vec_json(cam.source);
    }
    os << "\n}\n";
    return os.str();
}

ProjectionCamera load_camera(const std::filesystem::path& path) {
    try {
        return parse_camera(read_file(path));
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------- images

std::string format_pgm(const ProjectionImage& img) {
    const double max = img.max_value();
    const double scale = max > 0.0 ? max / 65535.0 : 0.0;
    std::ostringstream os;
    os << "P2\n# scale " << format_sig17(scale) << " (line integral per grey level)\n"
       << img.width << ' ' << img.height << "\n65535\n";
    for (std::size_t row = 0; row < img.height; ++row) {
        for (std::size_t col = 0; col < img.width; ++col) {
            const double v = img.at(col, row);
            require_finite(v);
            const long level = max > 0.0 ? std::lround(std::clamp(v / max, 0.0, 1.0) * 65535.0) : 0;
            os << (col ? " " : "") << level;
        }
        os << '\n';
    }
    return os.str();
}

std::string format_image_csv(const ProjectionImage& img) {
    std::string out;
    for (std::size_t row = 0; row < img.height; ++row) {
        for (std::size_t col = 0; col < img.width; ++col) {
            if (col) out += ',';
            out += format_decimal(img.at(col, row));
        }
        out += '\n';
    }
    return out;
}

ProjectionImage parse_image_csv(std::string_view text) {
    ProjectionImage img;
    std::size_t row = 0;
    for (const Line& line : data_lines(split_lines(text), 0)) {
        ++row;
        const auto f = split_char(line.text, ',');
        if (img.width == 0) {
            img.width = f.size();
        } else if (f.size() != img.width) {
            fail(line.number, "row " + std::to_string(row) + ": expected " + std::to_string(img.width) + " columns");
        }
        for (auto v : f) img.values.push_back(parse_double(trim(v), line.number));
    }
    if (row == 0) {
        throw IoError("image CSV is empty");
    }
    img.height = row;
    return img;
}

// ---------------------------------------------------------------- contact

std::string format_contact_map(const ContactMap& m) {
    std::string out = "vertex_id,distance_mm,class\n";
    for (std::size_t i = 0; i < m.classes.size(); ++i) {
        out += std::to_string(i);
        out += ',';
        out += format_decimal(m.distance[i]);
        out += ',';
        out += to_string(m.classes[i]);
        out += '\n';
    }
    return out;
}

std::string format_contact_series(const ContactSeries& s) {
    std::string out = "t,area_mm2,min_distance_mm,cx,cy,cz\n";
    for (const ContactSummary& c : s) {
        out += format_decimal(c.time) + ',' + format_decimal(c.area) + ',' + format_decimal(c.min_distance);
        if (c.centroid) {
            for (int a = 0; a < 3; ++a) out += ',' + format_decimal((*c.centroid)[a]);
        } else {
            out += ",,,";
        }
        out += '\n';
    }
    return out;
}

}  // namespace mandikin::io
