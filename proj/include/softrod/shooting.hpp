#pragma once

// Shooting solver for the rod boundary-value problem. The unknowns are the
// base loads G = (n(0), m(0)); the residual is the mismatch between the
// integrated tip loads and what the cap must carry. Two optimizers drive it
// to zero: Levenberg-Marquardt with adaptive damping and Powell's dogleg.

#include <softrod/dynamics.hpp>
#include <softrod/errors.hpp>
#include <softrod/kinematics.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

namespace softrod::shooting {

enum class Method { lm, dogleg };

inline Method method_from_string(std::string_view name) {
    if (name == "lm") return Method::lm;
    if (name == "dogleg") return Method::dogleg;
    throw ParseError("unknown shooting method '" + std::string(name) + "'");
}

inline std::string to_string(Method m) { return m == Method::lm ? "lm" : "dogleg"; }

struct SolverConfig {
    double tol_force = 1e-8;   ///< N
    double tol_moment = 1e-9;  ///< N m
    int max_iter = 100;
    double fd_step = 1e-7;
    double lm_damping_init = 1e-3;
    double lm_damping_decrease = 0.5;
    double lm_damping_increase = 3.0;
    double trust_radius_init = 1.0;
    double trust_expand = 2.0;
    double trust_shrink = 0.25;
    Method method = Method::lm;
    bool warm_start = true;

    void validate() const {
        if (!(tol_force > 0.0 && tol_moment > 0.0)) {
            throw InvalidParameter("solver tolerances must be positive");
        }
        if (max_iter < 1 || !(fd_step > 0.0)) {
            throw InvalidParameter("max_iter must be >= 1 and fd_step positive");
        }
    }

    bool operator==(const SolverConfig &) const = default;
};

/// Tip-load mismatch (E^F, E^M) and the rod it came from.
struct Evaluation {
    Vec6 residual;
    RodState state;
};

inline Evaluation residual(const Vec6 &guess, const RodProblem &pb) {
    Evaluation ev;
    ev.state = integrate_space(pb, base_state(pb, guess));
    const NodeState &tip = ev.state.tip();
    const TipTargets target = tip_boundary_targets(quat_to_rotation(tip.h), pb);
    ev.residual << tip.n - target.n, tip.m - target.m;
    return ev;
}

inline Vec6 residual_scale(const RodProblem &pb) {
    Vec6 s;
    s << Vec3::Constant(1.0 / pb.force_scale), Vec3::Constant(1.0 / pb.moment_scale);
    return s;
}

/// Forward-difference Jacobian of `f` at `x` with step fd_step * max(|x_k|, 1).
inline Mat6 jacobian_fd(const std::function<Vec6(const Vec6 &)> &f, const Vec6 &x, const Vec6 &fx, double fd_step) {
    Mat6 J;
    for (int k = 0; k < 6; ++k) {
        Vec6 xp = x;
        const double h = fd_step * std::max(std::abs(x[k]), 1.0);
        xp[k] += h;
        J.col(k) = (f(xp) - fx) / (xp[k] - x[k]);
    }
    return J;
}

/// Jacobian of the raw (unscaled) shooting residual.
inline Mat6 jacobian_fd(const Vec6 &guess, const RodProblem &pb, double fd_step = 1e-7) {
    const Vec6 r0 = residual(guess, pb).residual;
    return jacobian_fd([&](const Vec6 &g) { return residual(g, pb).residual; }, guess, r0, fd_step);
}

struct Solution {
    Vec6 guess;
    RodState state;
    Vec6 residual;
    int iterations = 0;
};

inline bool converged(const Vec6 &raw, const SolverConfig &cfg) {
    return raw.head<3>().cwiseAbs().maxCoeff() < cfg.tol_force && raw.tail<3>().cwiseAbs().maxCoeff() < cfg.tol_moment;
}

namespace detail {

struct Trial {
    Evaluation eval;
    Vec6 scaled;
    double cost;
};

inline std::optional<Trial> try_evaluate(const Vec6 &g, const RodProblem &pb, const Vec6 &scale) {
    try {
        Trial t{residual(g, pb), Vec6::Zero(), 0.0};
        t.scaled = scale.cwiseProduct(t.eval.residual);
        t.cost = 0.5 * t.scaled.squaredNorm();
        if (!std::isfinite(t.cost)) {
            return std::nullopt;
        }
        return t;
    } catch (const NumericalBlowup &) {
        return std::nullopt;
    }
}

inline Mat6 scaled_jacobian(const Vec6 &g, const Trial &at, const RodProblem &pb, const Vec6 &scale,
                            double fd_step) {
    Mat6 J;
    for (int k = 0; k < 6; ++k) {
        Vec6 gp = g;
        const double h = fd_step * std::max(std::abs(g[k]), 1.0);
        gp[k] += h;
        auto t = try_evaluate(gp, pb, scale);
        if (!t) {
            gp[k] = g[k] - h;
            t = try_evaluate(gp, pb, scale);
            if (!t) {
                throw NumericalBlowup("jacobian probe blew up in both directions");
            }
        }
        J.col(k) = (t->scaled - at.scaled) / (gp[k] - g[k]);
    }
    return J;
}

[[noreturn]] inline void fail(const char *method, const Trial &best, int iterations) {
    throw NoConvergence(std::string(method) + " reached the iteration limit",
                        best.eval.residual.head<3>().cwiseAbs().maxCoeff(),
                        best.eval.residual.tail<3>().cwiseAbs().maxCoeff(), iterations);
}

inline Trial initial(const Vec6 &g0, const RodProblem &pb, const Vec6 &scale) {
    Trial t{residual(g0, pb), Vec6::Zero(), 0.0};  // a blowup here is fatal
    t.scaled = scale.cwiseProduct(t.eval.residual);
    t.cost = 0.5 * t.scaled.squaredNorm();
    return t;
}

inline Solution finish(const Vec6 &g, Trial &&t, int iterations) {
    return {g, std::move(t.eval.state), t.eval.residual, iterations};
}

} // namespace detail

/// Levenberg-Marquardt with Marquardt diagonal scaling. Damping shrinks on
/// accepted steps and grows on rejected ones; a trial that blows up counts as rejected.
inline Solution solve_lm(const RodProblem &pb, const Vec6 &g0, const SolverConfig &cfg) {
    cfg.validate();
    const Vec6 scale = residual_scale(pb);
    Vec6 g = g0;
    detail::Trial cur = detail::initial(g, pb, scale);
    double lambda = cfg.lm_damping_init;
    int iter = 0;
    while (!converged(cur.eval.residual, cfg)) {
        if (iter >= cfg.max_iter) {
            detail::fail("levenberg-marquardt", cur, iter);
        }
        ++iter;
        const Mat6 J = detail::scaled_jacobian(g, cur, pb, scale, cfg.fd_step);
        const Mat6 JtJ = J.transpose() * J;
        const Vec6 grad = J.transpose() * cur.scaled;
        Vec6 diag = JtJ.diagonal().cwiseMax(1e-12 * std::max(JtJ.diagonal().maxCoeff(), 1e-300));
        bool accepted = false;
        for (int attempt = 0; attempt < 40 && !accepted; ++attempt) {
            Mat6 A = JtJ;
            A.diagonal() += lambda * diag;
            const Vec6 step = A.ldlt().solve(-grad);
            if (!step.allFinite()) {
                lambda *= cfg.lm_damping_increase;
                continue;
            }
            const Vec6 trial_g = g + step;
            auto trial = detail::try_evaluate(trial_g, pb, scale);
            if (trial && trial->cost < cur.cost) {
                g = trial_g;
                cur = std::move(*trial);
                lambda = std::max(lambda * cfg.lm_damping_decrease, 1e-15);
                accepted = true;
            } else {
                lambda *= cfg.lm_damping_increase;
            }
        }
        if (!accepted) {
            // no descent left at working precision
            if (converged(cur.eval.residual, cfg)) {
                break;
            }
            detail::fail("levenberg-marquardt stalled;", cur, iter);
        }
    }
    return detail::finish(g, std::move(cur), iter);
}

/// Powell dogleg trust-region method on the scaled residual.
inline Solution solve_dogleg(const RodProblem &pb, const Vec6 &g0, const SolverConfig &cfg) {
    cfg.validate();
    const Vec6 scale = residual_scale(pb);
    Vec6 g = g0;
    detail::Trial cur = detail::initial(g, pb, scale);
    double radius = cfg.trust_radius_init;
    int iter = 0;
    std::optional<Mat6> J;
    while (!converged(cur.eval.residual, cfg)) {
        if (iter >= cfg.max_iter) {
            detail::fail("dogleg", cur, iter);
        }
        ++iter;
        if (!J) {
            J = detail::scaled_jacobian(g, cur, pb, scale, cfg.fd_step);
        }
        const Vec6 grad = J->transpose() * cur.scaled;
        const Vec6 gauss_newton = J->colPivHouseholderQr().solve(-cur.scaled);
        const Vec6 Jg = (*J) * grad;
        const double cauchy_len = grad.squaredNorm() / std::max(Jg.squaredNorm(), 1e-300);
        const Vec6 steepest = -cauchy_len * grad;

        Vec6 step;
        if (gauss_newton.allFinite() && gauss_newton.norm() <= radius) {
            step = gauss_newton;
        } else if (steepest.norm() >= radius || !gauss_newton.allFinite()) {
            step = -(radius / std::max(grad.norm(), 1e-300)) * grad;
        } else {
            // walk from the Cauchy point toward the Gauss-Newton point until the boundary
            const Vec6 d = gauss_newton - steepest;
            const double a = d.squaredNorm();
            const double b = 2.0 * steepest.dot(d);
            const double c = steepest.squaredNorm() - radius * radius;
            const double tau = (-b + std::sqrt(std::max(b * b - 4.0 * a * c, 0.0))) / (2.0 * a);
            step = steepest + tau * d;
        }
        const Vec6 model_res = cur.scaled + (*J) * step;
        const double predicted = cur.cost - 0.5 * model_res.squaredNorm();
        auto trial = detail::try_evaluate(g + step, pb, scale);
        const double ratio = (trial && predicted > 0.0) ? (cur.cost - trial->cost) / predicted : -1.0;
        if (ratio > 0.75 && step.norm() > 0.99 * radius) {
            radius *= cfg.trust_expand;
        } else if (ratio < 0.25) {
            radius *= cfg.trust_shrink;
        }
        if (trial && ratio > 1e-4) {
            g += step;
            cur = std::move(*trial);
            J.reset();
        } else if (radius < 1e-14 * std::max(g.norm(), 1.0)) {
            if (converged(cur.eval.residual, cfg)) {
                break;
            }
            detail::fail("dogleg trust region collapsed;", cur, iter);
        }
    }
    return detail::finish(g, std::move(cur), iter);
}

inline Solution solve(const RodProblem &pb, const Vec6 &g0, const SolverConfig &cfg) {
    return cfg.method == Method::lm ? solve_lm(pb, g0, cfg) : solve_dogleg(pb, g0, cfg);
}

} // namespace softrod::shooting
