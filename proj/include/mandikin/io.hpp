#pragma once

#include "mandikin/contact.hpp"
#include "mandikin/geom.hpp"
#include "mandikin/mesh.hpp"
#include "mandikin/motion.hpp"
#include "mandikin/radiograph.hpp"
#include "mandikin/registration.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mandikin::io {

enum class MeshFormat { ply_ascii, stl_ascii, stl_binary, obj };

/// Format from the file extension (.ply, .obj, .stl -> binary STL).
MeshFormat mesh_format_for(const std::filesystem::path& path);
/// Sniffs ASCII vs binary STL from content.
MeshFormat detect_stl_format(std::string_view bytes);

// Parsers work on in-memory bytes; all failures throw IoError naming the line
// (text formats) or byte offset (binary STL).
TriangleMesh parse_mesh(std::string_view bytes, MeshFormat format);
std::string format_mesh(const TriangleMesh& mesh, MeshFormat format);

TriangleMesh load_mesh(const std::filesystem::path& path);
TriangleMesh load_mesh(const std::filesystem::path& path, MeshFormat format);
void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path);
void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path, MeshFormat format);

/// Line-oriented header (MANDIKIN-VOL 1) plus a raw float32 little-endian file.
struct VolumeHeader {
    std::array<std::size_t, 3> dims{};
    Vec3 spacing;
    Vec3 origin;
    std::string data;  // raw file path relative to the header
};
VolumeHeader parse_volume_header(std::string_view text);
std::string format_volume_header(const VolumeHeader& h);
VoxelVolume decode_volume(const VolumeHeader& h, std::string_view raw);
std::string encode_volume_values(const VoxelVolume& v);

VoxelVolume load_volume(const std::filesystem::path& header_path);
/// Writes the header and `<stem>.raw` next to it.
void save_volume(const VoxelVolume& v, const std::filesystem::path& header_path);

inline constexpr std::string_view kMotionHeader =
    "t,ux1,uy1,uz1,ux2,uy2,uz2,ux3,uy3,uz3,lx1,ly1,lz1,lx2,ly2,lz2,lx3,ly3,lz3";

MotionSequence parse_motion(std::string_view text);
std::string format_motion(const MotionSequence& seq);
MotionSequence load_motion(const std::filesystem::path& path);
void save_motion(const MotionSequence& seq, const std::filesystem::path& path);

inline constexpr std::string_view kRelativeMotionHeader = "t,r00,r01,r02,r10,r11,r12,r20,r21,r22,tx,ty,tz";

RelativeMotion parse_relative_motion(std::string_view text);
std::string format_relative_motion(const RelativeMotion& rm);
RelativeMotion load_relative_motion(const std::filesystem::path& path);
void save_relative_motion(const RelativeMotion& rm, const std::filesystem::path& path);

struct Landmark {
    std::string name;
    Vec3 position;
};
using LandmarkSet = std::vector<Landmark>;

LandmarkSet parse_landmarks(std::string_view text);
std::string format_landmarks(const LandmarkSet& set);
LandmarkSet load_landmarks(const std::filesystem::path& path);
void save_landmarks(const LandmarkSet& set, const std::filesystem::path& path);

/// Pairs landmarks by name (order of `source`); throws IoError when fewer than
/// three names are shared.
CorrespondenceSet match_landmarks(const LandmarkSet& source, const LandmarkSet& target);

struct RegistrationReport {
    std::optional<double> rms_mm;
    std::optional<int> iterations;
    std::optional<std::size_t> correspondences;
};

RigidTransform parse_transform(std::string_view json_text);
std::string format_transform(const RigidTransform& t, const RegistrationReport& report = {});
RigidTransform load_transform(const std::filesystem::path& path);
void save_transform(const RigidTransform& t, const std::filesystem::path& path, const RegistrationReport& report = {});

ProjectionCamera parse_camera(std::string_view json_text);
std::string format_camera(const ProjectionCamera& cam);
ProjectionCamera load_camera(const std::filesystem::path& path);

/// P2 PGM with values scaled linearly to 0..65535; the scale is recorded in a comment.
std::string format_pgm(const ProjectionImage& img);
/// One image row per line, comma separated.
std::string format_image_csv(const ProjectionImage& img);
ProjectionImage parse_image_csv(std::string_view text);

std::string format_contact_map(const ContactMap& m);
std::string format_contact_series(const ContactSeries& s);

/// Shortest plain-decimal text that reads back to exactly `v`.
std::string format_decimal(double v);
/// Plain decimal with at least 17 significant digits (always reads back exactly).
std::string format_sig17(double v);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace mandikin::io
