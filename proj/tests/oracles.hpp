#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance runner. Nothing here calls into the library's numerics.

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <utility>

namespace oracle {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec4 = Eigen::Vector4d;

inline Mat3 skew(const Vec3 &k) {
    Mat3 K;
    K << 0.0, -k.z(), k.y(), k.z(), 0.0, -k.x(), -k.y(), k.x(), 0.0;
    return K;
}

inline Mat3 rodrigues(const Vec3 &axis, double angle) {
    const Mat3 K = skew(axis.normalized());
    return Mat3::Identity() + std::sin(angle) * K + (1.0 - std::cos(angle)) * K * K;
}

inline Vec4 axis_angle_quaternion(const Vec3 &axis, double angle) {
    const Vec3 k = axis.normalized();
    const double s = std::sin(angle / 2.0);
    return Vec4(std::cos(angle / 2.0), s * k.x(), s * k.y(), s * k.z());
}

inline Vec3 curvature_profile(double s) { return Vec3(3.0 * std::sin(2.0 * s), 1.5 * std::cos(s), 2.0 + s); }

/// R_s = R u^ by classic RK4 on the matrix entries.
inline Mat3 integrate_rotation(double length, int steps) {
    Mat3 R = Mat3::Identity();
    const double ds = length / steps;
    auto f = [](const Mat3 &M, double s) { return Mat3(M * skew(curvature_profile(s))); };
    for (int k = 0; k < steps; ++k) {
        const double s = k * ds;
        const Mat3 k1 = f(R, s);
        const Mat3 k2 = f(R + 0.5 * ds * k1, s + 0.5 * ds);
        const Mat3 k3 = f(R + 0.5 * ds * k2, s + 0.5 * ds);
        const Mat3 k4 = f(R + ds * k3, s + ds);
        R += ds / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return R;
}

/// Two-layer tube written out from the stretches, integrated by composite trapezoid.
struct Tube {
    double R_i, R_m, R_o, psi;
    double mu, c1, c2, E_fiber;

    // (sigma_thth - sigma_rr, sigma_zz - sigma_rr) at current radius r
    std::pair<double, double> diffs(double lz, double lr, double r, bool inner) const {
        const double ri = lr * R_i;
        const double R = std::sqrt(R_i * R_i + lz * (r * r - ri * ri));
        const double lt = r / R;
        const double lrad = 1.0 / (lt * lz);
        const double iso = inner ? mu : c1 * mu;
        double dt = iso * (lt * lt - lrad * lrad);
        double dz = iso * (lz * lz - lrad * lrad);
        if (!inner) {
            const double c = std::cos(psi), s = std::sin(psi);
            const double I4 = lt * lt * c * c + lz * lz * s * s;
            const double w = c2 * E_fiber * (std::sqrt(I4) - 1.0) / (2.0 * std::sqrt(I4));
            dt += 4.0 * w * lt * lt * c * c;
            dz += 4.0 * w * lz * lz * s * s;
        }
        return {dt, dz};
    }

    double radius(double lz, double lr, double R) const {
        const double ri = lr * R_i;
        return std::sqrt(ri * ri + (R * R - R_i * R_i) / lz);
    }

    /// (sigma_rr(r_o) - sigma_rr(r_i), axial wall force) for inner pressure P,
    /// with sigma_rr accumulated along r.
    std::pair<double, double> loads(double lz, double lr, double P, int per_layer) const {
        const double ri = radius(lz, lr, R_i), rm = radius(lz, lr, R_m), ro = radius(lz, lr, R_o);
        double srr = -P;
        double force = 0.0;
        for (bool inner : {true, false}) {
            const double a = inner ? ri : rm;
            const double b = inner ? rm : ro;
            const double h = (b - a) / per_layer;
            auto prev = diffs(lz, lr, a, inner);
            double prev_zz = (prev.second + srr) * a;
            for (int k = 1; k <= per_layer; ++k) {
                const double x0 = a + (k - 1) * h;
                const double x1 = k == per_layer ? b : a + k * h;
                const auto cur = diffs(lz, lr, x1, inner);
                srr += 0.5 * (x1 - x0) * (prev.first / x0 + cur.first / x1);
                const double cur_zz = (cur.second + srr) * x1;
                force += 0.5 * (x1 - x0) * (prev_zz + cur_zz);
                prev = cur;
                prev_zz = cur_zz;
            }
        }
        return {srr + P, 2.0 * std::numbers::pi * force};
    }
};

} // namespace oracle
