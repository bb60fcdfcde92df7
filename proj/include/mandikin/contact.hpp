#pragma once

#include "mandikin/mesh.hpp"
#include "mandikin/motion.hpp"
#include "mandikin/parallel.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace mandikin {

struct ContactParams {
    double threshold_mm = 0.5;
    bool exclude_interior = true;

    void check() const;
};

enum class ContactClass : std::uint8_t { free, contact, excluded_interior };

const char* to_string(ContactClass c);

struct ContactMap {
    std::vector<ContactClass> classes;  // per vertex of mesh A
    std::vector<double> distance;       // per vertex, mm; negative inside B
    std::vector<bool> penetrating;      // vertex of A lies inside B
    double area = 0.0;                  // mm^2, faces of A with all three vertices in contact
    std::optional<Vec3> centroid;       // mean of contact vertices
    double min_distance = 0.0;          // smallest signed distance

    std::size_t contact_count() const;
};

/// Classifies every vertex of `a` against the indexed surface `b`.
/// A vertex is in contact when it is closer than the threshold and (with
/// interior exclusion) the segment to its nearest point on B neither has its
/// midpoint inside A or B nor crosses either surface between its endpoints.
/// Throws UsageError when interior exclusion is requested and B is not closed.
ContactMap contact_map(const TriangleMesh& a, const SpatialIndex& b, const ContactParams& p,
                       const Parallel& par = {});
/// Serial reference of contact_map; identical output.
ContactMap contact_map_reference(const TriangleMesh& a, const SpatialIndex& b, const ContactParams& p);

struct ContactSummary {
    double time = 0.0;
    double area = 0.0;
    double min_distance = 0.0;
    std::optional<Vec3> centroid;
};

using ContactSeries = std::vector<ContactSummary>;

/// Contact of the moving mesh `a` (posed by each frame of `rm`) against the static mesh `b`.
ContactSeries contact_series(const TriangleMesh& a, const TriangleMesh& b, const RelativeMotion& rm,
                             const ContactParams& p, const Parallel& par = {});

}  // namespace mandikin
