#pragma once

// Cosserat rod kinematics: skew maps, quaternion frames, strain containers and
// the per-node state shared by the static and dynamic solvers.

#include <softrod/errors.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

namespace softrod {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Orientation quaternion stored scalar first: (h1, h2, h3, h4) = h1 + h2 i + h3 j + h4 k.
using Quaternion = Eigen::Vector4d;

inline Quaternion identity_quaternion() { return Quaternion(1.0, 0.0, 0.0, 0.0); }

/// Skew matrix with hat(w) * x == w.cross(x).
inline Mat3 hat(const Vec3 &w) {
    Mat3 m;
    m << 0.0, -w.z(), w.y(),
         w.z(), 0.0, -w.x(),
         -w.y(), w.x(), 0.0;
    return m;
}

/// Inverse of hat. Throws NotSkewSymmetric if |M + M^T| exceeds `tol` entrywise.
inline Vec3 vee(const Mat3 &m, double tol = 1e-9) {
    const double residual = (m + m.transpose()).cwiseAbs().maxCoeff();
    if (!(residual <= tol)) {
        throw NotSkewSymmetric("symmetric part has magnitude " + std::to_string(residual));
    }
    return Vec3(m(2, 1), m(0, 2), m(1, 0));
}

/// Rotation matrix of a (not necessarily unit) quaternion. The 2/(h^T h)
/// factor makes any nonzero quaternion map to a proper rotation.
inline Mat3 quat_to_rotation(const Quaternion &h) {
    const double nn = h.squaredNorm();
    if (!(std::sqrt(nn) >= 1e-12)) {
        throw ZeroQuaternion("quaternion norm below 1e-12");
    }
    const double h1 = h[0], h2 = h[1], h3 = h[2], h4 = h[3];
    Mat3 b;
    b << -h3 * h3 - h4 * h4, h2 * h3 - h4 * h1, h2 * h4 + h3 * h1,
         h2 * h3 + h4 * h1, -h2 * h2 - h4 * h4, h3 * h4 - h2 * h1,
         h2 * h4 - h3 * h1, h3 * h4 + h2 * h1, -h2 * h2 - h3 * h3;
    return Mat3::Identity() + (2.0 / nn) * b;
}

/// Arclength derivative of the quaternion for body-frame curvature u.
inline Quaternion quat_rate_from_curvature(const Quaternion &h, const Vec3 &u) {
    const double u1 = u.x(), u2 = u.y(), u3 = u.z();
    Eigen::Matrix4d a;
    a << 0.0, -u1, -u2, -u3,
         u1, 0.0, u3, -u2,
         u2, -u3, 0.0, u1,
         u3, u2, -u1, 0.0;
    return 0.5 * a * h;
}

inline Quaternion normalized(const Quaternion &h) {
    const double n = h.norm();
    if (!(n >= 1e-12)) {
        throw ZeroQuaternion("cannot normalize a zero quaternion");
    }
    return h / n;
}

/// Shear/extension strain v, curvature u and their rest values.
struct StrainState {
    Vec3 v = Vec3(0.0, 0.0, 1.0);
    Vec3 u = Vec3::Zero();
    Vec3 v_star = Vec3(0.0, 0.0, 1.0);
    Vec3 u_star = Vec3::Zero();
};

/// State carried by the spatial ODE at one arclength station.
/// p, n, m are global-frame; q and w are body-frame velocities.
struct NodeState {
    Vec3 p = Vec3::Zero();
    Quaternion h = identity_quaternion();
    Vec3 n = Vec3::Zero();
    Vec3 m = Vec3::Zero();
    Vec3 q = Vec3::Zero();
    Vec3 w = Vec3::Zero();

    static constexpr int kSize = 19;
    using Packed = Eigen::Matrix<double, kSize, 1>;

    Packed pack() const {
        Packed y;
        y << p, h, n, m, q, w;
        return y;
    }

    static NodeState unpack(const Packed &y) {
        NodeState s;
        s.p = y.segment<3>(0);
        s.h = y.segment<4>(3);
        s.n = y.segment<3>(7);
        s.m = y.segment<3>(10);
        s.q = y.segment<3>(13);
        s.w = y.segment<3>(16);
        return s;
    }
};

/// Full rod configuration on an arclength grid.
struct RodState {
    std::vector<double> grid;
    std::vector<NodeState> nodes;
    /// Strains recovered from the constitutive law at each node.
    std::vector<Vec3> v;
    std::vector<Vec3> u;

    std::size_t size() const { return grid.size(); }
    const NodeState &tip() const { return nodes.back(); }
};

/// Uniform grid of `count` stations over [0, length]. Throws InvalidGrid for count < 2.
inline std::vector<double> uniform_grid(double length, std::size_t count) {
    if (count < 2 || !(length > 0.0)) {
        throw InvalidGrid("need at least two nodes and a positive length");
    }
    std::vector<double> s(count);
    for (std::size_t i = 0; i < count; ++i) {
        s[i] = length * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    s.back() = length;
    return s;
}

inline void validate_grid(const std::vector<double> &grid) {
    if (grid.size() < 2) {
        throw InvalidGrid("grid needs at least two nodes");
    }
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) {
            throw InvalidGrid("grid must be strictly increasing");
        }
    }
}

/// Max-norm residuals of the two velocity compatibility equations
///   q_s = v_t - u^ q + w^ v,   w_s = u_t - u^ w
/// evaluated at `later` with backward time differences against `earlier` and
/// centered arclength differences (one-sided at the ends). Diagnostic only.
inline std::pair<double, double> compatibility_residual(const RodState &earlier,
                                                        const RodState &later, double dt) {
    if (earlier.grid.size() != later.grid.size()) {
        throw GridMismatch("node counts differ");
    }
    for (std::size_t i = 0; i < later.grid.size(); ++i) {
        if (std::abs(earlier.grid[i] - later.grid[i]) > 1e-14 * (1.0 + std::abs(later.grid[i]))) {
            throw GridMismatch("arclength stations differ");
        }
    }
    const std::size_t count = later.size();
    auto d_ds = [&](std::size_t i, auto field) -> Vec3 {
        const std::size_t lo = i == 0 ? 0 : i - 1;
        const std::size_t hi = i + 1 == count ? i : i + 1;
        return (field(later.nodes[hi]) - field(later.nodes[lo])) / (later.grid[hi] - later.grid[lo]);
    };
    double res_q = 0.0;
    double res_w = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const NodeState &node = later.nodes[i];
        const Vec3 v_t = (later.v[i] - earlier.v[i]) / dt;
        const Vec3 u_t = (later.u[i] - earlier.u[i]) / dt;
        const Vec3 q_s = d_ds(i, [](const NodeState &s) { return s.q; });
        const Vec3 w_s = d_ds(i, [](const NodeState &s) { return s.w; });
        const Mat3 uh = hat(later.u[i]);
        res_q = std::max(res_q, (q_s - (v_t - uh * node.q + hat(node.w) * later.v[i])).cwiseAbs().maxCoeff());
        res_w = std::max(res_w, (w_s - (u_t - uh * node.w)).cwiseAbs().maxCoeff());
    }
    return {res_q, res_w};
}

} // namespace softrod
