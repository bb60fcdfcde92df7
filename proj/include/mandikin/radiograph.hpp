#pragma once

#include "mandikin/geom.hpp"
#include "mandikin/mesh.hpp"
#include "mandikin/parallel.hpp"

#include <array>
#include <cstddef>
#include <vector>

namespace mandikin {

/// Scalar grid, x fastest. `origin` is the centre of voxel (0,0,0); values are
/// attenuation coefficients per mm.
struct VoxelVolume {
    std::array<std::size_t, 3> dims{1, 1, 1};
    Vec3 spacing = Vec3::Ones();
    Vec3 origin = Vec3::Zero();
    std::vector<double> values;

    static VoxelVolume filled(std::array<std::size_t, 3> dims, const Vec3& spacing, const Vec3& origin,
                              double value = 0.0);

    std::size_t index(std::size_t i, std::size_t j, std::size_t k) const { return i + dims[0] * (j + dims[1] * k); }
    double at(std::size_t i, std::size_t j, std::size_t k) const { return values[index(i, j, k)]; }
    double& at(std::size_t i, std::size_t j, std::size_t k) { return values[index(i, j, k)]; }
    Vec3 center(std::size_t i, std::size_t j, std::size_t k) const;
    std::size_t voxel_count() const { return dims[0] * dims[1] * dims[2]; }
    /// Outer faces of the voxel grid.
    BoundingBox extent() const;

    /// Throws UsageError when dims, spacing or value count are invalid.
    void check() const;
};

/// Voxels whose centres lie inside the closed mesh get `mu`, others keep their value.
void rasterize(VoxelVolume& v, const SpatialIndex& body, double mu, const Parallel& par = {});

enum class ProjectionMode { parallel, point_source };

/// Flat detector. Pixel (col, row) sits at detector_origin + col*pitch*u_axis +
/// row*pitch*v_axis. Parallel rays run along u_axis x v_axis; point-source rays
/// run from `source` to the pixel centre.
struct ProjectionCamera {
    ProjectionMode mode = ProjectionMode::parallel;
    Vec3 detector_origin = Vec3::Zero();
    Vec3 u_axis = Vec3::UnitX();
    Vec3 v_axis = Vec3::UnitY();
    std::size_t width = 1;
    std::size_t height = 1;
    double pitch = 1.0;
    Vec3 source = Vec3(0.0, 0.0, 1000.0);

    Vec3 pixel_center(std::size_t col, std::size_t row) const {
        return detector_origin + (static_cast<double>(col) * pitch) * u_axis + (static_cast<double>(row) * pitch) * v_axis;
    }
    Vec3 normal() const { return u_axis.cross(v_axis); }

    void check() const;
};

struct AttenuatedBody {
    TriangleMesh mesh;
    double mu = 0.0;  // per mm
};

/// Line integrals of attenuation, row-major (row * width + col).
struct ProjectionImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> values;
    std::vector<std::size_t> invalid;  // pixel indices where grazing could not be resolved

    double at(std::size_t col, std::size_t row) const { return values[row * width + col]; }
    double max_value() const;
};

/// Exact voxel traversal along one line; the segment [tmin, tmax] of the ray.
double trace_voxels(const VoxelVolume& v, const Ray& ray, double tmin, double tmax);

/// Sum of voxel value x intersection length along every pixel ray.
ProjectionImage drr_voxel(const VoxelVolume& v, const ProjectionCamera& cam, const Parallel& par = {});
ProjectionImage drr_voxel_reference(const VoxelVolume& v, const ProjectionCamera& cam);

/// Sum over bodies of mu x inside-path length along every pixel ray. Throws
/// UsageError for open meshes or negative mu.
ProjectionImage drr_surface(const std::vector<AttenuatedBody>& bodies, const ProjectionCamera& cam,
                            const Parallel& par = {});
ProjectionImage drr_surface_reference(const std::vector<AttenuatedBody>& bodies, const ProjectionCamera& cam);

/// Marching cubes over the voxel centres with linear interpolation along cell
/// edges. Regions with value > iso are enclosed with outward-facing triangles.
TriangleMesh extract_isosurface(const VoxelVolume& v, double iso);

}  // namespace mandikin
