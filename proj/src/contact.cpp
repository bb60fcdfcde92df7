#include "mandikin/contact.hpp"

#include "mandikin/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mandikin {

namespace {

// Hits this close to either end of the vertex-to-surface segment belong to
// the endpoints themselves and are not crossings.
constexpr double kEndpointSlack = 1e-6;  // mm

struct VertexResult {
    ContactClass cls = ContactClass::free;
    double distance = 0.0;
    bool penetrating = false;
};

bool crosses(const SpatialIndex& index, const Vec3& from, const Vec3& dir, double length) {
    if (length <= 2.0 * kEndpointSlack) {
        return false;
    }
    const auto clean = index.robust_intersections({from, dir}, kEndpointSlack, length - kEndpointSlack);
    return !clean || !clean->first.hits.empty();  // unresolved grazing counts as a crossing
}

VertexResult classify(const Vec3& v, const SpatialIndex* a, const SpatialIndex& b, const ContactParams& p) {
    VertexResult r;
    const NearestHit hit = b.nearest_point(v);
    const double d = hit.distance;
    r.penetrating = b.closed() && b.is_inside(v);
    r.distance = r.penetrating ? -d : d;

    if (d >= p.threshold_mm) {
        r.cls = r.penetrating ? ContactClass::excluded_interior : ContactClass::free;
        return r;
    }
    if (r.penetrating || !p.exclude_interior || d <= 2.0 * kEndpointSlack) {
        r.cls = ContactClass::contact;
        return r;
    }
    const Vec3 mid = 0.5 * (v + hit.point);
    if (b.is_inside(mid) || (a != nullptr && a->closed() && a->is_inside(mid))) {
        r.cls = ContactClass::excluded_interior;
        return r;
    }
    const Vec3 dir = (hit.point - v) / d;
    if (crosses(b, v, dir, d) || (a != nullptr && crosses(*a, v, dir, d))) {
        r.cls = ContactClass::excluded_interior;
        return r;
    }
    r.cls = ContactClass::contact;
    return r;
}

void check_inputs(const TriangleMesh& a, const SpatialIndex& b, const ContactParams& p) {
    p.check();
    validate(a);
    if (p.exclude_interior && !b.closed()) {
        throw UsageError("interior exclusion requires a closed mesh B");
    }
}

ContactMap summarize(const TriangleMesh& a, const std::vector<VertexResult>& per_vertex) {
    ContactMap m;
    const std::size_t n = per_vertex.size();
    m.classes.resize(n);
    m.distance.resize(n);
    m.penetrating.resize(n);
    Vec3 sum = Vec3::Zero();
    std::size_t count = 0;
    double min_signed = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        m.classes[i] = per_vertex[i].cls;
        m.distance[i] = per_vertex[i].distance;
        m.penetrating[i] = per_vertex[i].penetrating;
        min_signed = std::min(min_signed, per_vertex[i].distance);
        if (per_vertex[i].cls == ContactClass::contact) {
            sum += a.vertices[i];
            ++count;
        }
    }
    m.min_distance = n > 0 ? min_signed : 0.0;
    if (count > 0) {
        m.centroid = sum / static_cast<double>(count);
    }
    for (std::size_t f = 0; f < a.faces.size(); ++f) {
        const Face& fc = a.faces[f];
        if (m.classes[fc[0]] == ContactClass::contact && m.classes[fc[1]] == ContactClass::contact &&
            m.classes[fc[2]] == ContactClass::contact) {
            m.area += a.face_area(f);
        }
    }
    return m;
}

std::optional<SpatialIndex> index_for(const TriangleMesh& a, const ContactParams& p) {
    if (!p.exclude_interior || a.faces.empty()) {
        return std::nullopt;
    }
    return SpatialIndex(a);
}

}  // namespace

void ContactParams::check() const {
    if (!(threshold_mm > 0.0) || !std::isfinite(threshold_mm)) {
        throw UsageError("contact threshold must be positive");
    }
}

const char* to_string(ContactClass c) {
    switch (c) {
        case ContactClass::contact:
            return "contact";
        case ContactClass::excluded_interior:
            return "excluded-interior";
        case ContactClass::free:
            break;
    }
    return "free";
}

std::size_t ContactMap::contact_count() const {
    return static_cast<std::size_t>(std::count(classes.begin(), classes.end(), ContactClass::contact));
}

ContactMap contact_map(const TriangleMesh& a, const SpatialIndex& b, const ContactParams& p, const Parallel& par) {
    check_inputs(a, b, p);
    const std::optional<SpatialIndex> a_index = index_for(a, p);
    const SpatialIndex* a_ptr = a_index ? &*a_index : nullptr;
    std::vector<VertexResult> per_vertex(a.vertices.size());
    const auto n = static_cast<std::ptrdiff_t>(a.vertices.size());
#pragma omp parallel for schedule(dynamic, 256) num_threads(par.threads())
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        per_vertex[i] = classify(a.vertices[i], a_ptr, b, p);
    }
    return summarize(a, per_vertex);
}

ContactMap contact_map_reference(const TriangleMesh& a, const SpatialIndex& b, const ContactParams& p) {
    check_inputs(a, b, p);
    const std::optional<SpatialIndex> a_index = index_for(a, p);
    const SpatialIndex* a_ptr = a_index ? &*a_index : nullptr;
    std::vector<VertexResult> per_vertex;
    per_vertex.reserve(a.vertices.size());
    for (const Vec3& v : a.vertices) {
        per_vertex.push_back(classify(v, a_ptr, b, p));
    }
    return summarize(a, per_vertex);
}

ContactSeries contact_series(const TriangleMesh& a, const TriangleMesh& b, const RelativeMotion& rm,
                             const ContactParams& p, const Parallel& par) {
    const SpatialIndex b_index(b);
    ContactSeries series;
    series.reserve(rm.size());
    for (std::size_t i = 0; i < rm.size(); ++i) {
        const ContactMap m = contact_map(transform_mesh(a, rm.transforms[i]), b_index, p, par);
        series.push_back({rm.times[i], m.area, m.min_distance, m.centroid});
    }
    return series;
}

}  // namespace mandikin
