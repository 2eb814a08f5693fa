#pragma once

// Time-semi-discretized Cosserat rod: once the BDF formula replaces every time
// derivative, each step is a spatial ODE in s for (p, h, n, m, q, w) whose
// coefficients carry the stored history. Actuator pressure enters as a
// follower load along each actuator axis plus, optionally, the radial
// pressure effect (RPE) converted to an equivalent axial force.

#include <softrod/actuator.hpp>
#include <softrod/bdf.hpp>
#include <softrod/constitutive.hpp>
#include <softrod/errors.hpp>
#include <softrod/kinematics.hpp>

#include <array>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

namespace softrod {

using constitutive::PerActuator;

enum class RpeMode { equivalent_force, strain_transfer, off };
enum class SpatialMethod { euler, rk4 };

inline std::string to_string(RpeMode mode) {
    switch (mode) {
    case RpeMode::equivalent_force: return "equivalent-force";
    case RpeMode::strain_transfer: return "strain-transfer";
    case RpeMode::off: return "off";
    }
    return "unknown";
}

inline RpeMode rpe_mode_from_string(std::string_view name) {
    if (name == "equivalent-force") return RpeMode::equivalent_force;
    if (name == "strain-transfer") return RpeMode::strain_transfer;
    if (name == "off") return RpeMode::off;
    throw ParseError("unknown rpe mode '" + std::string(name) + "'");
}

inline std::string to_string(SpatialMethod method) { return method == SpatialMethod::euler ? "euler" : "rk4"; }

inline SpatialMethod spatial_method_from_string(std::string_view name) {
    if (name == "euler") return SpatialMethod::euler;
    if (name == "rk4") return SpatialMethod::rk4;
    throw ParseError("unknown spatial method '" + std::string(name) + "'");
}

/// Physical description of the manipulator.
struct ManipulatorModel {
    constitutive::CrossSectionGeometry section;
    constitutive::MaterialLaw law;
    double length = 0.170;  ///< flexible length, caps excluded
    RpeMode rpe_mode = RpeMode::equivalent_force;
    actuator::RpeFit rpe;
    /// Feed the stretch a P + 1 instead of the strain a P into the RPE force.
    bool rpe_force_uses_stretch = false;
    Vec3 gravity = Vec3(0.0, 0.0, -9.81);
    double cap_mass = 0.02;
    bool self_weight = true;
    Vec3 base_position = Vec3::Zero();
    Quaternion base_orientation = identity_quaternion();

    double total_area() const { return 3.0 * section.wall_area(); }

    /// Area second moments of the whole section, diag(I_xx, I_yy, I_zz).
    Mat3 area_inertia() const {
        const double ixx = section.bending_area_moment();
        return Eigen::Vector3d(ixx, ixx, 2.0 * ixx).asDiagonal();
    }
};

/// Loads applied at one instant.
struct ActuationInput {
    PerActuator pressures_bar{0.0, 0.0, 0.0};
    Vec3 tip_force = Vec3::Zero();   ///< F^e, global
    Vec3 tip_moment = Vec3::Zero();  ///< L^e, global
    Vec3 distributed_force = Vec3::Zero();   ///< added to self weight, N/m, global
    Vec3 distributed_moment = Vec3::Zero();  ///< N m/m, global
};

/// Axial cap force of one actuator: pressure on the chamber plus the RPE term.
inline double actuator_axial_force(const ManipulatorModel &model, double pressure_bar, double modulus) {
    double force = pressure_bar * constitutive::kPascalPerBar * model.section.chamber_area();
    if (model.rpe_mode == RpeMode::equivalent_force) {
        const double stretch = actuator::rpe_strain(model.rpe, pressure_bar);
        const double strain = model.rpe_force_uses_stretch ? stretch : stretch - 1.0;
        force += modulus * model.section.wall_area() * strain;
    }
    return force;
}

/// Rest strains of the section. In strain-transfer mode the RPE free strain of
/// each actuator is moved to the neutral axis: stiffness-weighted mean
/// extension, plus the curvature that the eccentric free strains induce.
inline StrainState rest_strains(const ManipulatorModel &model, const constitutive::SectionState &section,
                                const PerActuator &pressures_bar) {
    StrainState rest;
    if (model.rpe_mode != RpeMode::strain_transfer) {
        return rest;
    }
    const double Am = model.section.wall_area();
    double axial = 0.0;
    double weight = 0.0;
    Vec3 moment = Vec3::Zero();
    for (int i = 0; i < 3; ++i) {
        const double eps = actuator::rpe_strain(model.rpe, pressures_bar[i]) - 1.0;
        const double ea = section.E[i] * Am;
        axial += ea * eps;
        weight += ea;
        const Vec3 &d = section.shifted_offsets[i];
        moment += ea * eps * Vec3(d.y(), -d.x(), 0.0);
    }
    rest.v_star = Vec3(0.0, 0.0, 1.0 + axial / weight);
    rest.u_star = section.K_bt_inv * moment;
    rest.v = rest.v_star;
    rest.u = rest.u_star;
    return rest;
}

/// Everything the spatial ODE needs for one boundary-value solve.
struct RodProblem {
    std::vector<double> grid;
    SpatialMethod method = SpatialMethod::rk4;
    constitutive::SectionState section;
    StrainState rest;
    PerActuator actuator_force{0.0, 0.0, 0.0};
    double c0 = 0.0;
    /// Per-node history terms; empty for a static solve.
    HistoryTerms history;
    double rho_area = 0.0;
    Mat3 rho_inertia = Mat3::Zero();
    Vec3 distributed_force = Vec3::Zero();   ///< f_e, global
    Vec3 distributed_moment = Vec3::Zero();  ///< l_e, global, before the neutral-axis weight arm
    bool weight_arm = false;                 ///< add (R D_Na) x f_e to l_e
    Vec3 cap_weight = Vec3::Zero();          ///< F^g
    Vec3 tip_force = Vec3::Zero();
    Vec3 tip_moment = Vec3::Zero();
    Vec3 base_position = Vec3::Zero();
    Quaternion base_orientation = identity_quaternion();
    double blowup_bound = 1e8;
    /// Residual scales: E A_m for forces, E A_m b for moments.
    double force_scale = 1.0;
    double moment_scale = 1.0;

    bool is_static() const { return history.v.empty(); }
};

/// Assembles the problem for given loads, time scheme and history (nullptr for static).
inline RodProblem make_problem(const ManipulatorModel &model, const ActuationInput &input,
                               const std::vector<double> &grid, SpatialMethod method, const BdfScheme &scheme,
                               const HistoryTerms *history) {
    validate_grid(grid);
    RodProblem pb;
    pb.grid = grid;
    pb.method = method;
    pb.section = constitutive::build_section(model.section, model.law, input.pressures_bar);
    if (model.law.kind == constitutive::LawKind::homogeneous) {
        pb.section.D_Na = Vec3::Zero();
    }
    pb.rest = rest_strains(model, pb.section, input.pressures_bar);
    for (int i = 0; i < 3; ++i) {
        pb.actuator_force[i] = actuator_axial_force(model, input.pressures_bar[i], pb.section.E[i]);
    }
    if (history != nullptr) {
        pb.c0 = scheme.c0;
        pb.history = *history;
    }
    pb.rho_area = model.law.rho * model.total_area();
    pb.rho_inertia = model.law.rho * model.area_inertia();
    pb.distributed_force = input.distributed_force;
    if (model.self_weight) {
        pb.distributed_force += pb.rho_area * model.gravity;
        pb.weight_arm = true;
    }
    pb.distributed_moment = input.distributed_moment;
    pb.cap_weight = model.cap_mass * model.gravity;
    pb.tip_force = input.tip_force;
    pb.tip_moment = input.tip_moment;
    pb.base_position = model.base_position;
    pb.base_orientation = normalized(model.base_orientation);
    pb.force_scale = pb.section.mean_modulus() * model.section.wall_area();
    pb.moment_scale = pb.force_scale * model.section.b;
    return pb;
}

/// History terms at one arclength station.
struct LocalHistory {
    Vec3 v = Vec3::Zero();
    Vec3 u = Vec3::Zero();
    Vec3 q = Vec3::Zero();
    Vec3 w = Vec3::Zero();
};

inline LocalHistory history_at(const RodProblem &pb, std::size_t node) {
    if (pb.is_static()) {
        return {};
    }
    return {pb.history.v[node], pb.history.u[node], pb.history.q[node], pb.history.w[node]};
}

inline LocalHistory history_between(const RodProblem &pb, std::size_t node, double fraction) {
    if (pb.is_static()) {
        return {};
    }
    const auto a = history_at(pb, node);
    const auto b = history_at(pb, node + 1);
    const double f = fraction;
    return {(1 - f) * a.v + f * b.v, (1 - f) * a.u + f * b.u, (1 - f) * a.q + f * b.q, (1 - f) * a.w + f * b.w};
}

/// Strains at a node from its internal loads.
inline StrainState node_strains(const RodProblem &pb, const NodeState &node, const Mat3 &R) {
    return constitutive::strains_from_loads(node.n, node.m, R, pb.section, pb.rest);
}

/// Arclength derivative of the node state given its rotation and strains.
inline NodeState::Packed ode_rhs(const RodProblem &pb, const NodeState &y, const Mat3 &R, const StrainState &st,
                                 const LocalHistory &hist) {
    const Vec3 &v = st.v;
    const Vec3 &u = st.u;
    const Mat3 uh = hat(u);
    const Mat3 omega = hat(y.w) + pb.c0 * Mat3::Identity();
    const Vec3 e3(0.0, 0.0, 1.0);
    const Vec3 uh_e3 = uh * e3;

    const Vec3 p_s = R * v;
    const Quaternion h_s = quat_rate_from_curvature(y.h, u);

    Vec3 l_e = pb.distributed_moment;
    if (pb.weight_arm) {
        l_e += (R * pb.section.D_Na).cross(pb.distributed_force);
    }

    Vec3 n_s = -pb.distributed_force + pb.rho_area * (R * (omega * y.q + hist.q));
    Vec3 m_s = -l_e - p_s.cross(y.n) + R * (omega * (pb.rho_inertia * y.w) + pb.rho_inertia * hist.w);
    Vec3 follower_moment = Vec3::Zero();
    double total_force = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double f = pb.actuator_force[i];
        if (f == 0.0) {
            continue;
        }
        const Vec3 &d = pb.section.shifted_offsets[i];
        total_force += f;
        follower_moment += f * ((v + uh * d).cross(e3) + d.cross(uh_e3));
    }
    n_s += total_force * (R * uh_e3);
    m_s += R * follower_moment;

    const Vec3 q_s = omega * v + hist.v - uh * y.q;
    const Vec3 w_s = omega * u + hist.u;

    NodeState::Packed out;
    out << p_s, h_s, n_s, m_s, q_s, w_s;
    return out;
}

/// Arclength derivative of the node state.
inline NodeState::Packed ode_rhs(const RodProblem &pb, const NodeState &y, const LocalHistory &hist) {
    const Mat3 R = quat_to_rotation(y.h);
    return ode_rhs(pb, y, R, node_strains(pb, y, R), hist);
}

inline NodeState::Packed ode_rhs(const RodProblem &pb, const NodeState::Packed &y, const LocalHistory &hist) {
    return ode_rhs(pb, NodeState::unpack(y), hist);
}

/// Internal loads the tip must carry: cap weight, actuator cap forces and external tip loads.
struct TipTargets {
    Vec3 n;
    Vec3 m;
};

inline TipTargets tip_boundary_targets(const Mat3 &R_tip, const RodProblem &pb) {
    const Vec3 e3(0.0, 0.0, 1.0);
    Vec3 force_local = Vec3::Zero();
    Vec3 moment_local = Vec3::Zero();
    for (int i = 0; i < 3; ++i) {
        const Vec3 F = pb.actuator_force[i] * e3;
        force_local += F;
        moment_local += pb.section.shifted_offsets[i].cross(F);
    }
    const Vec3 weight_moment = (R_tip * pb.section.D_Na).cross(pb.cap_weight);
    return {pb.cap_weight + R_tip * force_local + pb.tip_force,
            weight_moment + R_tip * moment_local + pb.tip_moment};
}

namespace detail {

inline void check_blowup(const NodeState::Packed &y, double bound, std::size_t node) {
    if (!y.allFinite() || y.cwiseAbs().maxCoeff() > bound) {
        throw NumericalBlowup("state exceeded " + std::to_string(bound) + " at node " + std::to_string(node));
    }
}

} // namespace detail

/// One explicit step of size ds. `slope0` is the derivative at y; `rhs(y, f)`
/// evaluates the derivative at fraction f of the interval (0.5 or 1).
template <class Y, class Rhs>
Y spatial_step(SpatialMethod method, const Y &y, double ds, const Y &slope0, Rhs &&rhs) {
    if (method == SpatialMethod::euler) {
        return Y(y + ds * slope0);
    }
    const Y k2 = rhs(Y(y + 0.5 * ds * slope0), 0.5);
    const Y k3 = rhs(Y(y + 0.5 * ds * k2), 0.5);
    const Y k4 = rhs(Y(y + ds * k3), 1.0);
    return Y(y + ds / 6.0 * (slope0 + 2.0 * k2 + 2.0 * k3 + k4));
}

/// Integrates from the base state over the problem grid. Quaternions are
/// renormalized after every step and strains are recovered at every node.
inline RodState integrate_space(const RodProblem &pb, const NodeState &base) {
    const std::size_t count = pb.grid.size();
    RodState out;
    out.grid = pb.grid;
    out.nodes.resize(count);
    out.v.resize(count);
    out.u.resize(count);

    NodeState::Packed y = base.pack();
    y.segment<4>(3) = normalized(y.segment<4>(3));
    for (std::size_t i = 0; i < count; ++i) {
        detail::check_blowup(y, pb.blowup_bound, i);
        const NodeState node = NodeState::unpack(y);
        const Mat3 R = quat_to_rotation(node.h);
        const StrainState st = node_strains(pb, node, R);
        out.nodes[i] = node;
        out.v[i] = st.v;
        out.u[i] = st.u;
        if (i + 1 == count) {
            break;
        }
        const double ds = pb.grid[i + 1] - pb.grid[i];
        const NodeState::Packed slope0 = ode_rhs(pb, node, R, st, history_at(pb, i));
        y = spatial_step(pb.method, y, ds, slope0, [&](const NodeState::Packed &yk, double fraction) {
            const LocalHistory hist = fraction == 1.0 ? history_at(pb, i + 1) : history_between(pb, i, fraction);
            return ode_rhs(pb, NodeState::unpack(yk), hist);
        });
        if (!y.allFinite()) {
            throw NumericalBlowup("non-finite state after node " + std::to_string(i));
        }
        y.segment<4>(3) = normalized(y.segment<4>(3));
    }
    return out;
}

/// Base state for a guess of (n(0), m(0)); q(0) = w(0) = 0 at the clamp.
inline NodeState base_state(const RodProblem &pb, const Vec6 &guess) {
    NodeState s;
    s.p = pb.base_position;
    s.h = pb.base_orientation;
    s.n = guess.head<3>();
    s.m = guess.tail<3>();
    return s;
}

} // namespace softrod
