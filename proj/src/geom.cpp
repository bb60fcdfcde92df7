#include "mandikin/geom.hpp"

#include "mandikin/error.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace mandikin {

namespace {

// Rotation angles below this are treated as pure translations.
constexpr double kZeroAngle = 1e-12;
constexpr double kZeroTranslation = 1e-15;

}  // namespace

RigidTransform RigidTransform::rotation_about(const Vec3& axis, double angle, const Vec3& point) {
    const double n = axis.norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
        throw NumericError("rotation axis has zero length");
    }
    RigidTransform t;
    t.rotation = Eigen::AngleAxisd(angle, axis / n).toRotationMatrix();
    t.translation = point - t.rotation * point;
    return t;
}

bool RigidTransform::is_exact_identity() const {
    return rotation == Mat3::Identity() && translation == Vec3::Zero();
}

bool is_valid(const RigidTransform& t, double tol) {
    if (!t.rotation.allFinite() || !t.translation.allFinite()) {
        return false;
    }
    const Mat3 gram = t.rotation.transpose() * t.rotation - Mat3::Identity();
    return gram.cwiseAbs().maxCoeff() < tol && std::abs(t.rotation.determinant() - 1.0) <= tol;
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
    return {a.rotation * b.rotation, a.rotation * b.translation + a.translation};
}

RigidTransform invert(const RigidTransform& t) {
    const Mat3 rt = t.rotation.transpose();
    return {rt, -(rt * t.translation)};
}

Line3 Line3::through(const Vec3& point, const Vec3& direction) {
    const double n = direction.norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
        throw NumericError("line direction has zero length");
    }
    return {point, direction / n};
}

ScrewAxis to_screw(const RigidTransform& t) {
    Eigen::Quaterniond q(t.rotation);
    q.normalize();
    if (q.w() < 0.0) {
        q.coeffs() = -q.coeffs();
    }
    const double vec_norm = q.vec().norm();
    const double angle = 2.0 * std::atan2(vec_norm, q.w());
    const Vec3& tr = t.translation;

    ScrewAxis s;
    if (angle < kZeroAngle) {
        const double len = tr.norm();
        if (len < kZeroTranslation) {
            return s;  // identity convention: +z through the origin
        }
        s.axis = {Vec3::Zero(), tr / len};
        s.slide = len;
        return s;
    }

    const Vec3 u = q.vec() / vec_norm;
    const double slide = u.dot(tr);
    const Vec3 perp = tr - slide * u;
    // Foot of the axis from the origin: solves (I - R) c = perp with c orthogonal to u.
    const double cot_half = 1.0 / std::tan(0.5 * angle);
    const Vec3 point = 0.5 * (perp + cot_half * u.cross(tr));
    s.axis = {point - u.dot(point) * u, u};
    s.angle = angle;
    s.slide = slide;
    return s;
}

RigidTransform from_screw(const ScrewAxis& s) {
    const Vec3& u = s.axis.direction;
    const Vec3& c = s.axis.point;
    RigidTransform t;
    t.rotation = Eigen::AngleAxisd(s.angle, u).toRotationMatrix();
    // c - R c by Rodrigues, with 1 - cos written as 2 sin^2(angle/2) so that
    // far-away axis points of small rotations do not cancel catastrophically.
    const double half_sin = std::sin(0.5 * s.angle);
    const Vec3 c_perp = c - u.dot(c) * u;
    t.translation = 2.0 * half_sin * half_sin * c_perp - std::sin(s.angle) * u.cross(c) + s.slide * u;
    return t;
}

ClosestPoints closest_points(const Line3& a, const Line3& b) {
    // Written component-wise so that swapping the arguments swaps the results bit-exactly.
    const Vec3& da = a.direction;
    const Vec3& db = b.direction;
    const double cx = da.y() * db.z() - da.z() * db.y();
    const double cy = da.z() * db.x() - da.x() * db.z();
    const double cz = da.x() * db.y() - da.y() * db.x();
    const double cross_norm = std::sqrt(cx * cx + cy * cy + cz * cz);

    const double wx = a.point.x() - b.point.x();
    const double wy = a.point.y() - b.point.y();
    const double wz = a.point.z() - b.point.z();
    const double ab = da.x() * db.x() + da.y() * db.y() + da.z() * db.z();
    const double aw = da.x() * wx + da.y() * wy + da.z() * wz;
    const double bw = db.x() * wx + db.y() * wy + db.z() * wz;

    if (cross_norm < kParallelTolerance) {
        return {a.point, b.point + bw * db, LineRelation::parallel};
    }

    const double denom = cross_norm * cross_norm;
    const double sa = (ab * bw - aw) / denom;
    const double sb = (bw - ab * aw) / denom;
    Vec3 pa = a.point + sa * da;
    Vec3 pb = b.point + sb * db;
    if ((pa - pb).norm() < kIntersectTolerance) {
        const Vec3 mid = 0.5 * (pa + pb);
        return {mid, mid, LineRelation::intersecting};
    }
    return {pa, pb, LineRelation::skew};
}

Mat3 nearest_rotation(const Mat3& m) {
    if (!m.allFinite()) {
        throw NumericError("degenerate direction matrix");
    }
    Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vec3 sv = svd.singularValues();
    if (!(sv(0) > 0.0) || sv(2) <= 1e-12 * sv(0) || m.determinant() <= 0.0) {
        throw NumericError("degenerate direction matrix");
    }
    Mat3 r = svd.matrixU() * svd.matrixV().transpose();
    if (r.determinant() < 0.0) {
        // Only reachable through rounding when det(m) is tiny relative to its scale.
        throw NumericError("degenerate direction matrix");
    }
    return r;
}

RigidTransform interpolate(const RigidTransform& a, const RigidTransform& b, double fraction) {
    if (fraction == 0.0) {
        return a;
    }
    if (fraction == 1.0) {
        return b;
    }
    const Eigen::Quaterniond qa(a.rotation);
    const Eigen::Quaterniond qb(b.rotation);
    RigidTransform out;
    out.rotation = qa.normalized().slerp(fraction, qb.normalized()).toRotationMatrix();
    out.translation = (1.0 - fraction) * a.translation + fraction * b.translation;
    return out;
}

double rotation_angle(const Mat3& r) {
    Eigen::Quaterniond q(r);
    q.normalize();
    return 2.0 * std::atan2(q.vec().norm(), std::abs(q.w()));
}

double max_corner_deviation(const RigidTransform& a, const RigidTransform& b, double half_side) {
    double worst = 0.0;
    for (int i = 0; i < 8; ++i) {
        const Vec3 p((i & 1) ? half_side : -half_side, (i & 2) ? half_side : -half_side,
                     (i & 4) ? half_side : -half_side);
        worst = std::max(worst, (a.apply(p) - b.apply(p)).norm());
    }
    return worst;
}

}  // namespace mandikin
