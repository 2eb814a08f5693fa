#pragma once

// Backward differentiation time discretization y_t(t_i) = c0 y(t_i) + y^h(t_i),
// where y^h collects the stored history. Covers BDF1, BDF2, BDF3 and the
// BDF-alpha family (alpha = 0 is BDF2, alpha = -0.5 the trapezoidal rule).

#include <softrod/errors.hpp>
#include <softrod/kinematics.hpp>

#include <algorithm>
#include <array>
#include <cstddef>
#include <deque>
#include <string>
#include <string_view>
#include <vector>

namespace softrod {

enum class SchemeKind { bdf1, bdf2, bdf3, bdf_alpha, trapezoidal };

inline std::string to_string(SchemeKind kind) {
    switch (kind) {
    case SchemeKind::bdf1: return "bdf1";
    case SchemeKind::bdf2: return "bdf2";
    case SchemeKind::bdf3: return "bdf3";
    case SchemeKind::bdf_alpha: return "bdf-alpha";
    case SchemeKind::trapezoidal: return "trapezoidal";
    }
    return "unknown";
}

inline SchemeKind scheme_from_string(std::string_view name) {
    if (name == "bdf1" || name == "backward-euler") return SchemeKind::bdf1;
    if (name == "bdf2") return SchemeKind::bdf2;
    if (name == "bdf3") return SchemeKind::bdf3;
    if (name == "bdf-alpha" || name == "bdf_alpha") return SchemeKind::bdf_alpha;
    if (name == "trapezoidal") return SchemeKind::trapezoidal;
    throw ParseError("unknown time scheme '" + std::string(name) + "'");
}

struct BdfScheme {
    SchemeKind kind = SchemeKind::bdf1;
    double alpha = 0.0;
    double dt = 1.0 / 30.0;
    double c0 = 30.0;
    /// Weights of y(t_{i-1}), y(t_{i-2}), y(t_{i-3}).
    std::array<double, 3> c{-30.0, 0.0, 0.0};
    /// Weight of y_t(t_{i-1}).
    double d1 = 0.0;

    /// Number of past samples of y the history term reads.
    std::size_t depth() const {
        switch (kind) {
        case SchemeKind::bdf1: return 1;
        case SchemeKind::bdf3: return 3;
        case SchemeKind::trapezoidal: return 1;
        default: return 2;
        }
    }
    bool uses_rate_history() const { return d1 != 0.0; }
    int order() const { return kind == SchemeKind::bdf1 ? 1 : kind == SchemeKind::bdf3 ? 3 : 2; }
    /// Steps marched with BDF1 before this scheme has the history it needs.
    int cold_start_steps() const { return std::max(order() - 1, 1); }
};

/// Coefficients for `kind` at step `dt`. `alpha` is read only for bdf_alpha.
inline BdfScheme make_scheme(SchemeKind kind, double dt, double alpha = 0.0) {
    if (!(dt > 0.0)) {
        throw InvalidParameter("time step must be positive");
    }
    BdfScheme s;
    s.kind = kind;
    s.dt = dt;
    auto bdf_alpha = [&](double a) {
        if (a < -0.5 || a > 0.0) {
            throw InvalidParameter("alpha must lie in [-0.5, 0]");
        }
        s.alpha = a;
        s.c0 = (1.5 + a) / (dt * (1.0 + a));
        s.c = {-2.0 / dt, (0.5 + a) / (dt * (1.0 + a)), 0.0};
        s.d1 = a / (1.0 + a);
    };
    switch (kind) {
    case SchemeKind::bdf1:
        s.c0 = 1.0 / dt;
        s.c = {-1.0 / dt, 0.0, 0.0};
        break;
    case SchemeKind::bdf2:
        s.c0 = 1.5 / dt;
        s.c = {-2.0 / dt, 0.5 / dt, 0.0};
        break;
    case SchemeKind::bdf3:
        s.c0 = 11.0 / (6.0 * dt);
        s.c = {-3.0 / dt, 3.0 / (2.0 * dt), -1.0 / (3.0 * dt)};
        break;
    case SchemeKind::bdf_alpha:
        bdf_alpha(alpha);
        break;
    case SchemeKind::trapezoidal:
        bdf_alpha(-0.5);
        s.kind = SchemeKind::trapezoidal;
        break;
    }
    return s;
}

/// Zero-history scheme for static solves: every inertial term vanishes.
inline BdfScheme static_scheme() {
    BdfScheme s;
    s.c0 = 0.0;
    s.c = {0.0, 0.0, 0.0};
    s.d1 = 0.0;
    return s;
}

/// y^h from past samples (most recent first) and, when needed, the last rate.
template <class T>
T history_term(const BdfScheme &scheme, const std::vector<T> &past, const T *past_rate) {
    if (past.size() < scheme.depth()) {
        throw InsufficientHistory("scheme needs " + std::to_string(scheme.depth()) + " past samples, have " +
                                  std::to_string(past.size()));
    }
    if (scheme.uses_rate_history() && past_rate == nullptr) {
        throw InsufficientHistory("scheme needs the previous time derivative");
    }
    T out = scheme.c[0] * past[0];
    for (std::size_t k = 1; k < scheme.depth(); ++k) {
        out = out + scheme.c[k] * past[k];
    }
    if (scheme.uses_rate_history()) {
        out = out + scheme.d1 * (*past_rate);
    }
    return out;
}

template <class T>
T bdf_time_derivative(const BdfScheme &scheme, const T &now, const std::vector<T> &past, const T *past_rate) {
    return scheme.c0 * now + history_term(scheme, past, past_rate);
}

/// Combined history terms per node for the four differentiated fields.
struct HistoryTerms {
    std::vector<Vec3> v;
    std::vector<Vec3> u;
    std::vector<Vec3> q;
    std::vector<Vec3> w;

    static HistoryTerms zeros(std::size_t count) {
        HistoryTerms h;
        h.v.assign(count, Vec3::Zero());
        h.u.assign(count, Vec3::Zero());
        h.q.assign(count, Vec3::Zero());
        h.w.assign(count, Vec3::Zero());
        return h;
    }
};

/// Time derivatives of v, u, q, w at one time level.
struct RodRates {
    std::vector<Vec3> v;
    std::vector<Vec3> u;
    std::vector<Vec3> q;
    std::vector<Vec3> w;
};

/// Converged past states (most recent first) and the rates implied at the latest one.
class HistoryBuffer {
public:
    static constexpr std::size_t kMaxDepth = 3;

    /// Starts from an equilibrium: one stored sample and zero rates.
    explicit HistoryBuffer(RodState initial) {
        RodRates zero;
        const std::size_t count = initial.size();
        zero.v.assign(count, Vec3::Zero());
        zero.u = zero.q = zero.w = zero.v;
        rates_ = std::move(zero);
        states_.push_front(std::move(initial));
    }

    std::size_t samples() const { return states_.size(); }
    const RodState &latest() const { return states_.front(); }
    const RodState &sample(std::size_t k) const { return states_.at(k); }
    const RodRates &latest_rates() const { return rates_; }

    /// y^h at every node for `scheme`.
    HistoryTerms terms(const BdfScheme &scheme) const {
        if (states_.size() < scheme.depth()) {
            throw InsufficientHistory("buffer holds " + std::to_string(states_.size()) + " samples, scheme needs " +
                                      std::to_string(scheme.depth()));
        }
        const std::size_t count = latest().size();
        HistoryTerms out = HistoryTerms::zeros(count);
        auto combine = [&](auto field, auto rate_field, std::vector<Vec3> &dst) {
            for (std::size_t i = 0; i < count; ++i) {
                std::vector<Vec3> past;
                past.reserve(scheme.depth());
                for (std::size_t k = 0; k < scheme.depth(); ++k) {
                    past.push_back(field(states_[k], i));
                }
                const Vec3 rate = rate_field(i);
                dst[i] = history_term(scheme, past, &rate);
            }
        };
        combine([](const RodState &s, std::size_t i) { return s.v[i]; }, [&](std::size_t i) { return rates_.v[i]; },
                out.v);
        combine([](const RodState &s, std::size_t i) { return s.u[i]; }, [&](std::size_t i) { return rates_.u[i]; },
                out.u);
        combine([](const RodState &s, std::size_t i) { return s.nodes[i].q; },
                [&](std::size_t i) { return rates_.q[i]; }, out.q);
        combine([](const RodState &s, std::size_t i) { return s.nodes[i].w; },
                [&](std::size_t i) { return rates_.w[i]; }, out.w);
        return out;
    }

    /// Records a converged state solved with `scheme` and history `terms`,
    /// deriving its rates as c0 y + y^h.
    void push(RodState state, const BdfScheme &scheme, const HistoryTerms &terms) {
        const std::size_t count = state.size();
        RodRates r;
        r.v.resize(count);
        r.u.resize(count);
        r.q.resize(count);
        r.w.resize(count);
        for (std::size_t i = 0; i < count; ++i) {
            r.v[i] = scheme.c0 * state.v[i] + terms.v[i];
            r.u[i] = scheme.c0 * state.u[i] + terms.u[i];
            r.q[i] = scheme.c0 * state.nodes[i].q + terms.q[i];
            r.w[i] = scheme.c0 * state.nodes[i].w + terms.w[i];
        }
        rates_ = std::move(r);
        states_.push_front(std::move(state));
        while (states_.size() > kMaxDepth) {
            states_.pop_back();
        }
    }

private:
    std::deque<RodState> states_;
    RodRates rates_;
};

} // namespace softrod
