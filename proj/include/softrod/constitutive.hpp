#pragma once

// Cross-section stiffness of the three-actuator manipulator. The homogeneous
// law uses one Young's modulus; the inhomogeneous law gives each actuator its
// own load-dependent modulus, which moves the neutral axis off the centroid.

#include <softrod/errors.hpp>
#include <softrod/kinematics.hpp>

#include <array>
#include <cmath>
#include <numbers>
#include <utility>

namespace softrod::constitutive {

inline constexpr double kPascalPerBar = 1e5;

using PerActuator = std::array<double, 3>;

struct CrossSectionGeometry {
    double b = 0.055;
    double R_i = 9.5e-3;
    double R_o = 14.0e-3;

    double wall_area() const { return std::numbers::pi * (R_o * R_o - R_i * R_i); }
    double chamber_area() const { return std::numbers::pi * R_i * R_i; }
    double second_moment() const {
        return std::numbers::pi * (std::pow(R_o, 4) - std::pow(R_i, 4)) / 4.0;
    }

    /// Actuator axes relative to the centroid, local frame.
    std::array<Vec3, 3> layout() const {
        const double s3 = std::sqrt(3.0);
        return {Vec3(s3 * b / 3.0, 0.0, 0.0), Vec3(-s3 * b / 6.0, b / 2.0, 0.0),
                Vec3(-s3 * b / 6.0, -b / 2.0, 0.0)};
    }

    /// I_xx = I_yy of the whole section about the centroid.
    double bending_area_moment() const { return 3.0 * second_moment() + wall_area() * b * b / 2.0; }
};

enum class LawKind { homogeneous, inhomogeneous };

struct MaterialLaw {
    LawKind kind = LawKind::homogeneous;
    double E_const = 289142.05;  ///< Pa
    double a1 = 0.00742681;      ///< 1/N
    double a2 = 0.00031962;      ///< 1/N^2
    double gamma = 0.4094;       ///< G / E
    double rho = 1100.0;         ///< kg/m^3
    double max_operating_force = 100.0;  ///< N, upper end of the range where dv/dn must stay positive

    /// Slope of the strain-force fit, dv/dn.
    double compliance_slope(double n) const { return 2.0 * a2 * n + a1; }

    void validate() const {
        if (!(gamma > 0.0)) {
            throw InvalidParameter("gamma must be positive");
        }
        if (kind == LawKind::homogeneous && !(E_const > 0.0)) {
            throw InvalidParameter("E must be positive");
        }
        if (kind == LawKind::inhomogeneous &&
            !(compliance_slope(0.0) > 0.0 && compliance_slope(max_operating_force) > 0.0)) {
            throw NonPositiveStiffness("dv/dn must stay positive over [0, max_operating_force]");
        }
    }
};

/// Modulus of one actuator carrying axial load magnitude `n_axial` (N).
/// The fit gives strain per newton, so E = 1 / (A_m dv/dn).
inline double young_modulus(const MaterialLaw &law, const CrossSectionGeometry &geom, double n_axial) {
    if (law.kind == LawKind::homogeneous) {
        return law.E_const;
    }
    const double beta = law.compliance_slope(n_axial);
    if (!(beta > 0.0)) {
        throw NonPositiveStiffness("dv/dn = " + std::to_string(beta) + " at n = " + std::to_string(n_axial));
    }
    return 1.0 / (geom.wall_area() * beta);
}

/// Axial load magnitude on each actuator from end-cap balance: pressurizing
/// actuator i loads each of the other two with P_i A_in / 2. Superposed over
/// simultaneous pressures. Pressures in bar, forces in N.
inline PerActuator passive_actuator_forces(const PerActuator &pressures_bar, double chamber_area) {
    PerActuator forces{0.0, 0.0, 0.0};
    for (int i = 0; i < 3; ++i) {
        const double share = pressures_bar[i] * kPascalPerBar * chamber_area / 2.0;
        for (int j = 0; j < 3; ++j) {
            if (j != i) {
                forces[j] += share;
            }
        }
    }
    return forces;
}

inline Vec3 neutral_axis(const PerActuator &E, double b) {
    const double sum = E[0] + E[1] + E[2];
    return Vec3(std::sqrt(3.0) * b / 6.0 * (2.0 * E[0] - E[1] - E[2]) / sum,
                b / 2.0 * (E[1] - E[2]) / sum, 0.0);
}

/// Stiffness data valid for one set of actuator moduli.
struct SectionState {
    PerActuator E{};
    Vec3 D_Na = Vec3::Zero();
    Mat3 K_se = Mat3::Identity();
    Mat3 K_bt = Mat3::Identity();
    Mat3 K_se_inv = Mat3::Identity();
    Mat3 K_bt_inv = Mat3::Identity();
    std::array<Vec3, 3> shifted_offsets{};

    double mean_modulus() const { return (E[0] + E[1] + E[2]) / 3.0; }
};

inline void finalize(SectionState &s) {
    s.K_se_inv = s.K_se.inverse();
    s.K_bt_inv = s.K_bt.inverse();
}

inline std::pair<Mat3, Mat3> stiffness_homogeneous(const CrossSectionGeometry &geom, const MaterialLaw &law) {
    const double E = law.E_const;
    const double G = law.gamma * E;
    const double Am = geom.wall_area();
    const double Ixx = geom.bending_area_moment();
    Mat3 kse = Mat3::Zero();
    kse.diagonal() << 3.0 * G * Am, 3.0 * G * Am, 3.0 * E * Am;
    Mat3 kbt = Mat3::Zero();
    kbt.diagonal() << E * Ixx, E * Ixx, G * 2.0 * Ixx;
    return {kse, kbt};
}

/// Section with per-actuator moduli, stiffness taken about the shifted neutral axis.
inline SectionState stiffness_inhomogeneous(const CrossSectionGeometry &geom, const PerActuator &E, double gamma) {
    for (double e : E) {
        if (!(e > 0.0)) {
            throw NonPositiveStiffness("actuator moduli must be positive");
        }
    }
    SectionState s;
    s.E = E;
    s.D_Na = neutral_axis(E, geom.b);
    const auto layout = geom.layout();
    for (int i = 0; i < 3; ++i) {
        s.shifted_offsets[i] = layout[i] - s.D_Na;
    }
    const double Am = geom.wall_area();
    const double Io = geom.second_moment();
    const double Esum = E[0] + E[1] + E[2];
    const double half_b = geom.b / 2.0;
    const double x1 = std::sqrt(3.0) * geom.b / 3.0;
    const double x23 = std::sqrt(3.0) * geom.b / 6.0;
    const double xb = s.D_Na.x();
    const double yb = s.D_Na.y();

    s.K_se = Mat3::Zero();
    s.K_se.diagonal() << gamma * Esum * Am, gamma * Esum * Am, Esum * Am;

    const double k11 = Esum * Io + Am * (E[0] * yb * yb + E[1] * (half_b - yb) * (half_b - yb) +
                                         E[2] * (half_b + yb) * (half_b + yb));
    const double k22 = Esum * Io + Am * (E[0] * (x1 - xb) * (x1 - xb) + (E[1] + E[2]) * (x23 + xb) * (x23 + xb));
    // m1 couples to u2 through -sum E_i A_m x_i y_i (strain at (x, y) is v3 + u1 y - u2 x)
    const double k12 = Am * (E[0] * yb * (x1 - xb) + (x23 + xb) * (E[1] * (half_b - yb) - E[2] * (half_b + yb)));
    double polar = 0.0;
    for (int i = 0; i < 3; ++i) {
        polar += E[i] * (2.0 * Io + Am * s.shifted_offsets[i].squaredNorm());
    }
    s.K_bt << k11, k12, 0.0,
              k12, k22, 0.0,
              0.0, 0.0, gamma * polar;
    finalize(s);
    return s;
}

/// Section for the given law and actuator pressures (bar).
inline SectionState build_section(const CrossSectionGeometry &geom, const MaterialLaw &law,
                                  const PerActuator &pressures_bar) {
    if (law.kind == LawKind::homogeneous) {
        SectionState s;
        s.E = {law.E_const, law.E_const, law.E_const};
        std::tie(s.K_se, s.K_bt) = stiffness_homogeneous(geom, law);
        s.shifted_offsets = geom.layout();
        finalize(s);
        return s;
    }
    const auto loads = passive_actuator_forces(pressures_bar, geom.chamber_area());
    PerActuator E{};
    for (int i = 0; i < 3; ++i) {
        E[i] = young_modulus(law, geom, loads[i]);
    }
    return stiffness_inhomogeneous(geom, E, law.gamma);
}

struct InternalLoads {
    Vec3 n;
    Vec3 m;
};

inline InternalLoads internal_loads(const StrainState &strains, const Mat3 &R, const SectionState &section) {
    return {R * (section.K_se * (strains.v - strains.v_star)), R * (section.K_bt * (strains.u - strains.u_star))};
}

inline StrainState strains_from_loads(const Vec3 &n, const Vec3 &m, const Mat3 &R, const SectionState &section,
                                      const StrainState &rest) {
    StrainState out = rest;
    out.v = rest.v_star + section.K_se_inv * (R.transpose() * n);
    out.u = rest.u_star + section.K_bt_inv * (R.transpose() * m);
    return out;
}

} // namespace softrod::constitutive
