#pragma once

// Two-layer fiber-reinforced tube: an incompressible Neo-Hookean core wrapped
// in a sheath that mixes the same isotropic matrix with two helical fiber
// families. Solves for the axial and inner radial stretch under pressure and
// axial load, and fits the pressure-to-axial-stretch line that the rod model
// consumes as its radial pressure effect (RPE).
//
// Units: lengths in m, stresses and pressures in Pa, forces in N. Only the
// RpeFit boundary speaks bar.

#include <softrod/errors.hpp>
#include <softrod/kinematics.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace softrod::actuator {

inline constexpr double kPascalPerBar = 1e5;

struct ActuatorGeometry {
    double R_i = 9.5e-3;
    double R_m = 12.5e-3;
    double R_o = 14.0e-3;
    double psi = 3.0 * std::numbers::pi / 180.0;
    double L0 = 0.170;

    void validate() const {
        if (!(0.0 < R_i && R_i < R_m && R_m < R_o)) {
            throw InvalidParameter("radii must satisfy 0 < R_i < R_m < R_o");
        }
        if (!(0.0 < psi && psi < std::numbers::pi / 2.0)) {
            throw InvalidParameter("fiber angle must lie in (0, pi/2)");
        }
    }
};

struct HyperelasticParams {
    double mu = 100e3;      ///< core shear modulus, shared by the sheath matrix
    double c1 = 0.9;        ///< isotropic volume fraction of the sheath
    double c2 = 0.1;        ///< fiber volume fraction of the sheath
    double E_fiber = 50e6;  ///< fiber Young's modulus

    void validate() const {
        if (!(mu > 0.0 && E_fiber > 0.0 && c1 >= 0.0 && c2 >= 0.0)) {
            throw InvalidParameter("need mu > 0, E_fiber > 0, c1 >= 0, c2 >= 0");
        }
        if (std::abs(c1 + c2 - 1.0) > 1e-12) {
            throw InvalidParameter("volume fractions must sum to one");
        }
    }
};

/// Axial stretch and inner radial stretch r_i / R_i.
struct DeformationState {
    double lambda_z = 1.0;
    double lambda_r = 1.0;
};

enum class Layer { inner, outer };

/// Current radius of the material point at reference radius R.
inline double current_radius(const ActuatorGeometry &geom, const DeformationState &st, double R) {
    const double ri = st.lambda_r * geom.R_i;
    const double r2 = ri * ri + (R * R - geom.R_i * geom.R_i) / st.lambda_z;
    if (!(r2 > 0.0) || !(st.lambda_z > 0.0) || !(st.lambda_r > 0.0)) {
        throw CollapsedWall("incompressibility map gives non-positive r^2");
    }
    return std::sqrt(r2);
}

/// Reference radius of the material point now at current radius r.
inline double reference_radius(const ActuatorGeometry &geom, const DeformationState &st, double r) {
    const double ri = st.lambda_r * geom.R_i;
    const double R2 = geom.R_i * geom.R_i + st.lambda_z * (r * r - ri * ri);
    if (!(R2 > 0.0)) {
        throw CollapsedWall("inverse incompressibility map gives non-positive R^2");
    }
    return std::sqrt(R2);
}

/// diag(dr/dR, r/R, lambda_z) in cylindrical (r, theta, z) components.
inline Mat3 deformation_gradient(const ActuatorGeometry &geom, const DeformationState &st, double R) {
    const double slack = 1e-12 * geom.R_o;
    if (R < geom.R_i - slack || R > geom.R_o + slack) {
        throw OutOfWall("reference radius outside [R_i, R_o]");
    }
    const double r = current_radius(geom, st, R);
    Mat3 F = Mat3::Zero();
    F(0, 0) = R / (r * st.lambda_z);
    F(1, 1) = r / R;
    F(2, 2) = st.lambda_z;
    return F;
}

struct FiberInvariants {
    double I1;
    double I4;
    double I6;
};

inline std::pair<Vec3, Vec3> fiber_directions(double psi) {
    return {Vec3(0.0, std::cos(psi), std::sin(psi)), Vec3(0.0, std::cos(psi), -std::sin(psi))};
}

inline FiberInvariants fiber_invariants(const Mat3 &F, double psi) {
    const auto [S1, S2] = fiber_directions(psi);
    const Vec3 s1 = F * S1;
    const Vec3 s2 = F * S2;
    return {(F * F.transpose()).trace(), s1.dot(s1), s2.dot(s2)};
}

struct StressDifferences {
    double theta_minus_r;  ///< sigma_thth - sigma_rr
    double z_minus_r;      ///< sigma_zz - sigma_rr
};

/// Hydrostatic-free Cauchy stress differences for a diagonal F.
inline StressDifferences cauchy_stress_diff(Layer layer, const Mat3 &F, const HyperelasticParams &params,
                                            double psi) {
    const double fr2 = F(0, 0) * F(0, 0);
    const double ft2 = F(1, 1) * F(1, 1);
    const double fz2 = F(2, 2) * F(2, 2);
    if (layer == Layer::inner) {
        return {params.mu * (ft2 - fr2), params.mu * (fz2 - fr2)};
    }
    StressDifferences out{params.c1 * params.mu * (ft2 - fr2), params.c1 * params.mu * (fz2 - fr2)};
    if (params.c2 == 0.0) {
        return out;
    }
    const auto inv = fiber_invariants(F, psi);
    const auto [S1, S2] = fiber_directions(psi);
    const Vec3 s1 = F * S1;
    const Vec3 s2 = F * S2;
    // dW/dI for E (sqrt(I) - 1)^2 / 2, scaled by the fiber fraction
    const double w4 = params.c2 * params.E_fiber * (std::sqrt(inv.I4) - 1.0) / (2.0 * std::sqrt(inv.I4));
    const double w6 = params.c2 * params.E_fiber * (std::sqrt(inv.I6) - 1.0) / (2.0 * std::sqrt(inv.I6));
    // s (x) s has no radial component for fibers in the theta-z plane
    out.theta_minus_r += 2.0 * (w4 * s1.y() * s1.y() + w6 * s2.y() * s2.y());
    out.z_minus_r += 2.0 * (w4 * s1.z() * s1.z() + w6 * s2.z() * s2.z());
    return out;
}

/// Stress differences at current radius r, with the layer picked from the reference radius.
inline StressDifferences stress_diff_at(const ActuatorGeometry &geom, const HyperelasticParams &params,
                                        const DeformationState &st, double r, Layer layer) {
    const double R = std::clamp(reference_radius(geom, st, r), geom.R_i, geom.R_o);
    return cauchy_stress_diff(layer, deformation_gradient(geom, st, R), params, geom.psi);
}

/// Current radii (r_i, r_m, r_o).
struct CurrentRadii {
    double ri;
    double rm;
    double ro;
};

inline CurrentRadii current_radii(const ActuatorGeometry &geom, const DeformationState &st) {
    return {current_radius(geom, st, geom.R_i), current_radius(geom, st, geom.R_m),
            current_radius(geom, st, geom.R_o)};
}

namespace detail {

inline constexpr double kQuadratureTolerance = 1e-9;
inline constexpr unsigned kQuadratureMaxDepth = 12;

/// Adaptive G7K15 on [a, b]. Converged when the error estimate is within
/// kQuadratureTolerance of the L1 norm or below `abs_floor`. The bisection
/// depth grows only while the target is missed: on nearly vanishing
/// integrands, deeper splitting just accumulates roundoff in the estimate.
template <class F>
double integrate(F f, double a, double b, double abs_floor) {
    if (a == b) {
        return 0.0;
    }
    double error = 0.0;
    for (unsigned depth = 0; depth <= kQuadratureMaxDepth; depth += 4) {
        double l1 = 0.0;
        const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
            f, a, b, depth, kQuadratureTolerance, &error, &l1);
        if (!std::isfinite(value)) {
            throw QuadratureFailure("non-finite integral");
        }
        if (error <= kQuadratureTolerance * l1 || error <= abs_floor) {
            return value;
        }
    }
    throw QuadratureFailure("error estimate " + std::to_string(error) + " exceeds tolerance");
}

} // namespace detail

/// sigma_rr(r_o) - sigma_rr(r_i), from radial equilibrium d(sigma_rr)/dr = (sigma_thth - sigma_rr)/r.
inline double radial_stress_drop(const ActuatorGeometry &geom, const HyperelasticParams &params,
                                 const DeformationState &st) {
    const auto [ri, rm, ro] = current_radii(geom, st);
    auto integrand = [&](Layer layer) {
        return [&, layer](double r) { return stress_diff_at(geom, params, st, r, layer).theta_minus_r / r; };
    };
    const double floor = 1e-3 * detail::kQuadratureTolerance * params.mu;
    return detail::integrate(integrand(Layer::inner), ri, rm, floor) +
           detail::integrate(integrand(Layer::outer), rm, ro, floor);
}

/// Axial wall force for internal pressure P (Pa) with sigma_rr(r_i) = -P.
///
/// The hydrostatic part is folded in by integrating sigma_rr r by parts:
///   int sigma_rr r dr = [sigma_rr r^2/2] - 1/2 int (sigma_thth - sigma_rr) r dr,
/// so only single integrals of the stress differences are needed.
inline double axial_load(const ActuatorGeometry &geom, const HyperelasticParams &params,
                         const DeformationState &st, double P) {
    const auto [ri, rm, ro] = current_radii(geom, st);
    const double floor = 1e-3 * detail::kQuadratureTolerance * params.mu;
    const double moment_floor = floor * geom.R_o * geom.R_o;
    double drop = 0.0;
    double moment_zr = 0.0;
    double moment_tr = 0.0;
    for (Layer layer : {Layer::inner, Layer::outer}) {
        const double a = layer == Layer::inner ? ri : rm;
        const double b = layer == Layer::inner ? rm : ro;
        drop += detail::integrate(
            [&](double r) { return stress_diff_at(geom, params, st, r, layer).theta_minus_r / r; }, a, b, floor);
        moment_zr += detail::integrate(
            [&](double r) { return stress_diff_at(geom, params, st, r, layer).z_minus_r * r; }, a, b, moment_floor);
        moment_tr += detail::integrate(
            [&](double r) { return stress_diff_at(geom, params, st, r, layer).theta_minus_r * r; }, a, b, moment_floor);
    }
    const double sigma_rr_outer = -P + drop;
    const double integral_rr =
        0.5 * sigma_rr_outer * ro * ro + 0.5 * P * ri * ri - 0.5 * moment_tr;
    return 2.0 * std::numbers::pi * (moment_zr + integral_rr);
}

/// Loading case for solve_equilibrium.
struct BoundaryCondition {
    enum class Kind { pressurized, radial_only, external_force };
    Kind kind = Kind::radial_only;
    double pressure = 0.0;  ///< Pa (pressurized, radial_only)
    double force = 0.0;     ///< N (external_force)

    static BoundaryCondition pressurized(double P) { return {Kind::pressurized, P, 0.0}; }
    static BoundaryCondition radial_only(double P) { return {Kind::radial_only, P, 0.0}; }
    static BoundaryCondition external_force(double F) { return {Kind::external_force, 0.0, F}; }
};

/// Residual targets (radial stress drop, axial force) and internal pressure for a bc.
struct EquilibriumTargets {
    double drop;
    double axial;
    double internal_pressure;
};

inline EquilibriumTargets equilibrium_targets(const ActuatorGeometry &geom, const DeformationState &st,
                                              const BoundaryCondition &bc) {
    using K = BoundaryCondition::Kind;
    switch (bc.kind) {
    case K::pressurized: {
        const double ri = st.lambda_r * geom.R_i;
        return {bc.pressure, bc.pressure * std::numbers::pi * ri * ri, bc.pressure};
    }
    case K::radial_only:
        return {bc.pressure, 0.0, bc.pressure};
    case K::external_force:
        return {0.0, bc.force, 0.0};
    }
    return {0.0, 0.0, 0.0};
}

/// Normalized equilibrium residual: stresses over mu, forces over mu R_i^2.
inline Eigen::Vector2d equilibrium_residual(const ActuatorGeometry &geom, const HyperelasticParams &params,
                                            const DeformationState &st, const BoundaryCondition &bc) {
    const auto target = equilibrium_targets(geom, st, bc);
    const double drop = radial_stress_drop(geom, params, st);
    const double axial = axial_load(geom, params, st, target.internal_pressure);
    return {(drop - target.drop) / params.mu,
            (axial - target.axial) / (params.mu * geom.R_i * geom.R_i)};
}

struct EquilibriumOptions {
    double tolerance = 1e-8;
    int max_iter = 60;
    double fd_step = 1e-6;
    double continuation_step = 0.05 * kPascalPerBar;
};

namespace detail {

inline bool admissible(const DeformationState &st) {
    return st.lambda_z > 0.0 && st.lambda_r > 0.0 && std::isfinite(st.lambda_z) && std::isfinite(st.lambda_r);
}

/// Damped Newton from `start`. Returns false on failure and leaves the best state in `out`.
inline bool newton(const ActuatorGeometry &geom, const HyperelasticParams &params, const BoundaryCondition &bc,
                   DeformationState start, const EquilibriumOptions &opt, DeformationState &out, double &res_out) {
    DeformationState x = start;
    Eigen::Vector2d r = equilibrium_residual(geom, params, x, bc);
    for (int it = 0; it < opt.max_iter; ++it) {
        res_out = r.cwiseAbs().maxCoeff();
        out = x;
        if (res_out < opt.tolerance) {
            return true;
        }
        Eigen::Matrix2d J;
        for (int k = 0; k < 2; ++k) {
            DeformationState plus = x;
            DeformationState minus = x;
            (k == 0 ? plus.lambda_z : plus.lambda_r) += opt.fd_step;
            (k == 0 ? minus.lambda_z : minus.lambda_r) -= opt.fd_step;
            J.col(k) = (equilibrium_residual(geom, params, plus, bc) -
                        equilibrium_residual(geom, params, minus, bc)) / (2.0 * opt.fd_step);
        }
        const Eigen::Vector2d dx = J.fullPivLu().solve(-r);
        if (!dx.allFinite()) {
            return false;
        }
        double step = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 30; ++ls, step *= 0.5) {
            DeformationState trial{x.lambda_z + step * dx[0], x.lambda_r + step * dx[1]};
            if (!admissible(trial)) {
                continue;
            }
            Eigen::Vector2d rt;
            try {
                rt = equilibrium_residual(geom, params, trial, bc);
            } catch (const Error &) {
                continue;
            }
            if (rt.allFinite() && rt.norm() < (1.0 - 1e-4 * step) * r.norm()) {
                x = trial;
                r = rt;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            res_out = r.cwiseAbs().maxCoeff();
            out = x;
            return res_out < opt.tolerance;
        }
    }
    res_out = r.cwiseAbs().maxCoeff();
    out = x;
    return res_out < opt.tolerance;
}

} // namespace detail

/// Stretches that balance the loading case. Newton from (1, 1) first, then
/// continuation in pressure (or force) if that fails.
inline DeformationState solve_equilibrium(const ActuatorGeometry &geom, const HyperelasticParams &params,
                                          const BoundaryCondition &bc, const EquilibriumOptions &opt = {}) {
    geom.validate();
    params.validate();
    if (bc.pressure < 0.0 || !std::isfinite(bc.pressure) || !std::isfinite(bc.force)) {
        throw InvalidParameter("pressure must be non-negative and loads finite");
    }
    DeformationState result;
    double residual = 0.0;
    if (detail::newton(geom, params, bc, DeformationState{}, opt, result, residual)) {
        return result;
    }
    // continuation on the load magnitude, warm-starting each level
    const bool by_force = bc.kind == BoundaryCondition::Kind::external_force;
    const double total = by_force ? bc.force : bc.pressure;
    const double step_size = by_force ? 0.05 * params.mu * geom.R_i * geom.R_i : opt.continuation_step;
    const int levels = std::max(1, static_cast<int>(std::ceil(std::abs(total) / step_size)));
    DeformationState guess;
    for (int k = 1; k <= levels; ++k) {
        BoundaryCondition partial = bc;
        const double fraction = static_cast<double>(k) / levels;
        (by_force ? partial.force : partial.pressure) = total * fraction;
        if (!detail::newton(geom, params, partial, guess, opt, result, residual)) {
            if (!detail::admissible(result)) {
                throw NonPhysical("equilibrium left the admissible region");
            }
            throw NoConvergence("equilibrium Newton stalled at load fraction " + std::to_string(fraction),
                                residual, residual, opt.max_iter);
        }
        guess = result;
    }
    return result;
}

/// Pressure-to-axial-stretch line with intercept pinned to one.
struct RpeFit {
    double a = 0.05324473;  ///< per bar
    std::string pressure_unit = "bar";
    double r_squared = 1.0;
};

struct PressureStretchSample {
    double pressure_bar;
    double lambda_z;
};

/// Least-squares slope of lambda_z - 1 against P with zero intercept.
inline RpeFit fit_rpe_polynomial(const std::vector<PressureStretchSample> &samples) {
    if (samples.size() < 2) {
        throw DegenerateSamples("need at least two samples");
    }
    const bool all_equal = std::all_of(samples.begin(), samples.end(), [&](const auto &s) {
        return s.pressure_bar == samples.front().pressure_bar;
    });
    if (all_equal) {
        throw DegenerateSamples("all pressures are equal");
    }
    double spp = 0.0;
    double spy = 0.0;
    double mean = 0.0;
    for (const auto &s : samples) {
        spp += s.pressure_bar * s.pressure_bar;
        spy += s.pressure_bar * (s.lambda_z - 1.0);
        mean += s.lambda_z;
    }
    mean /= static_cast<double>(samples.size());
    RpeFit fit;
    fit.a = spy / spp;
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (const auto &s : samples) {
        const double pred = fit.a * s.pressure_bar + 1.0;
        ss_res += (s.lambda_z - pred) * (s.lambda_z - pred);
        ss_tot += (s.lambda_z - mean) * (s.lambda_z - mean);
    }
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

/// RPE stretch a P + 1 for P in bar.
inline double rpe_strain(const RpeFit &fit, double pressure_bar) { return fit.a * pressure_bar + 1.0; }

} // namespace softrod::actuator
