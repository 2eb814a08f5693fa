#pragma once

// Scenario configuration: a JSON tree whose keys carry their unit as a
// suffix (_m, _Pa, _bar, _s, ...). Parsing is strict: unknown keys and
// mistyped values raise ParseError naming the offending field.

#include <softrod/actuator.hpp>
#include <softrod/bdf.hpp>
#include <softrod/constitutive.hpp>
#include <softrod/dynamics.hpp>
#include <softrod/errors.hpp>
#include <softrod/shooting.hpp>

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace softrod::scenario {

using json = nlohmann::ordered_json;

/// Which actuators a scenario drives: (a) actuator 1, (b) actuators 2 and 3,
/// all three equally, or an explicit per-actuator program.
enum class DriveCase { a, b, all, custom };

inline std::string to_string(DriveCase c) {
    switch (c) {
    case DriveCase::a: return "a";
    case DriveCase::b: return "b";
    case DriveCase::all: return "all";
    case DriveCase::custom: return "custom";
    }
    return "unknown";
}

inline DriveCase drive_case_from_string(std::string_view name) {
    if (name == "a") return DriveCase::a;
    if (name == "b") return DriveCase::b;
    if (name == "all") return DriveCase::all;
    if (name == "custom") return DriveCase::custom;
    throw ParseError("unknown case '" + std::string(name) + "'");
}

/// Mask of driven actuators for a preset case.
inline std::array<bool, 3> driven_actuators(DriveCase c) {
    switch (c) {
    case DriveCase::a: return {true, false, false};
    case DriveCase::b: return {false, true, true};
    case DriveCase::all: return {true, true, true};
    case DriveCase::custom: break;
    }
    throw InvalidParameter("custom case has no preset actuator mask");
}

/// Pressure program of one actuator, in bar.
struct Signal {
    enum class Kind { constant, ramp, sinusoid, tabulated };
    Kind kind = Kind::constant;
    double value = 0.0;       ///< constant
    double start = 0.0;       ///< ramp value before t_start
    double end = 0.0;         ///< ramp value after t_end
    double t_start = 0.0;
    double t_end = 1.0;
    double mean = 0.35;       ///< sinusoid
    double amplitude = 0.25;
    double omega = 1.0;       ///< rad/s
    double phase = 4.0 * std::numbers::pi / 3.0;
    double phi0 = 0.0;
    std::vector<double> times;   ///< tabulated, strictly increasing
    std::vector<double> values;

    static Signal constant(double p) {
        Signal s;
        s.value = p;
        return s;
    }
    static Signal ramp(double p0, double p1, double t0, double t1) {
        Signal s;
        s.kind = Kind::ramp;
        s.start = p0;
        s.end = p1;
        s.t_start = t0;
        s.t_end = t1;
        return s;
    }
    static Signal sinusoid(double mean, double amplitude, double omega, double phase, double phi0) {
        Signal s;
        s.kind = Kind::sinusoid;
        s.mean = mean;
        s.amplitude = amplitude;
        s.omega = omega;
        s.phase = phase;
        s.phi0 = phi0;
        return s;
    }
    static Signal tabulated(std::vector<double> t, std::vector<double> p) {
        Signal s;
        s.kind = Kind::tabulated;
        s.times = std::move(t);
        s.values = std::move(p);
        s.validate();
        return s;
    }

    void validate() const {
        if (kind == Kind::ramp && !(t_end > t_start)) {
            throw InvalidParameter("ramp needs t_end > t_start");
        }
        if (kind == Kind::tabulated) {
            if (times.empty() || times.size() != values.size()) {
                throw InvalidParameter("tabulated signal needs matching, non-empty time and value arrays");
            }
            if (!std::is_sorted(times.begin(), times.end(), std::less_equal<>()) ||
                std::adjacent_find(times.begin(), times.end()) != times.end()) {
                throw InvalidParameter("tabulated times must be strictly increasing");
            }
        }
    }

    /// Pressure at time t; tabulated signals interpolate linearly and hold their end values.
    double operator()(double t) const {
        switch (kind) {
        case Kind::constant: return value;
        case Kind::ramp:
            if (t <= t_start) return start;
            if (t >= t_end) return end;
            return start + (end - start) * (t - t_start) / (t_end - t_start);
        case Kind::sinusoid: return mean + amplitude * std::sin(omega * t + phase + phi0);
        case Kind::tabulated: {
            if (t <= times.front()) return values.front();
            if (t >= times.back()) return values.back();
            const auto hi = std::upper_bound(times.begin(), times.end(), t);
            const std::size_t k = static_cast<std::size_t>(hi - times.begin());
            const double f = (t - times[k - 1]) / (times[k] - times[k - 1]);
            return values[k - 1] + f * (values[k] - values[k - 1]);
        }
        }
        return 0.0;
    }

    bool operator==(const Signal &) const = default;
};

struct GeometryConfig {
    double b = 0.055;          ///< m, actuator pitch
    double R_i = 9.5e-3;       ///< m
    double R_f = 12.5e-3;      ///< m, fiber layer
    double R_o = 14.0e-3;      ///< m
    double l_o = 0.170;        ///< m, flexible length
    double l_cap = 0.015;      ///< m, rigid cap (excluded from l_o)
    double phi_deg = 120.0;    ///< actuator spacing
    double fiber_angle_deg = 3.0;

    bool operator==(const GeometryConfig &) const = default;
};

struct MaterialConfig {
    constitutive::LawKind law = constitutive::LawKind::inhomogeneous;
    double E = 289142.05;      ///< Pa
    double a1 = 0.00742681;    ///< 1/N
    double a2 = 0.00031962;    ///< 1/N^2
    double gamma = 0.4094;
    double rho = 1100.0;       ///< kg/m^3
    double max_operating_force = 100.0;  ///< N

    bool operator==(const MaterialConfig &) const = default;
};

struct RpeConfig {
    RpeMode mode = RpeMode::equivalent_force;
    double a = 0.05324473;     ///< 1/bar
    bool force_uses_stretch = false;

    bool operator==(const RpeConfig &) const = default;
};

/// Parameters of the single-actuator continuum model behind rpe-fit.
struct ContinuumConfig {
    double mu = 100e3;         ///< Pa
    double c1 = 0.9;
    double c2 = 0.1;
    double E_fiber = 50e6;     ///< Pa

    bool operator==(const ContinuumConfig &) const = default;
};

struct BodyConfig {
    std::array<double, 3> gravity{0.0, 0.0, -9.81};  ///< m/s^2
    double cap_mass = 0.02;    ///< kg
    bool self_weight = true;

    bool operator==(const BodyConfig &) const = default;
};

struct DiscretizationConfig {
    int nodes = 50;
    SpatialMethod spatial = SpatialMethod::rk4;
    SchemeKind scheme = SchemeKind::bdf_alpha;
    double alpha = -0.2;
    double dt = 1.0 / 30.0;    ///< s
    double timeframe = 1.0;    ///< s

    int steps() const { return static_cast<int>(std::llround(timeframe / dt)); }
    bool operator==(const DiscretizationConfig &) const = default;
};

enum class InitialState { equilibrium, rest };

struct ActuationConfig {
    DriveCase drive_case = DriveCase::a;
    /// Program of every driven actuator in cases a, b and all.
    Signal drive = Signal::sinusoid(0.35, 0.25, 1.0, 4.0 * std::numbers::pi / 3.0, 0.0);
    /// Per-actuator programs for the custom case.
    std::array<Signal, 3> signals{};
    /// Start from the equilibrium at P(0) or from the unpressurized equilibrium.
    InitialState initial = InitialState::equilibrium;
    std::array<double, 3> tip_force{0.0, 0.0, 0.0};   ///< N, global
    std::array<double, 3> tip_moment{0.0, 0.0, 0.0};  ///< N m, global

    bool operator==(const ActuationConfig &) const = default;
};

struct PressureRange {
    double start = 0.15;       ///< bar
    double stop = 0.65;
    double step = 0.05;

    /// start, start + step, ... up to stop, built without accumulation.
    std::vector<double> levels() const {
        if (!(step > 0.0) || stop < start) {
            throw InvalidParameter("pressure range needs step > 0 and stop >= start");
        }
        const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
        std::vector<double> out(count);
        for (std::size_t k = 0; k < count; ++k) {
            out[k] = start + static_cast<double>(k) * step;
        }
        return out;
    }
    bool operator==(const PressureRange &) const = default;
};

struct SweepConfig {
    std::vector<DriveCase> cases{DriveCase::a, DriveCase::b};
    PressureRange pressures;

    bool operator==(const SweepConfig &) const = default;
};

struct BenchmarkConfig {
    std::vector<int> grid_sizes{50, 200};
    std::vector<double> alphas{-0.1, -0.2, -0.3};
    int reference_nodes = 800;
    double reference_dt = 1.0 / 240.0;
    double reference_check_dt = 1.0 / 120.0;
    double reference_alpha = -0.2;
    bool use_cache = true;
    std::string cache_dir;     ///< empty: output directory

    bool operator==(const BenchmarkConfig &) const = default;
};

struct ConvergenceConfig {
    std::vector<int> spatial_intervals{4, 8, 16, 32, 64};
    double manufactured_bend_angle = std::numbers::pi / 2.0;  ///< rad over the rod
    std::vector<int> temporal_steps_per_second{30, 60, 120, 240};
    int reference_steps_per_second = 480;
    double temporal_alpha = -0.2;

    bool operator==(const ConvergenceConfig &) const = default;
};

enum class FitBoundary { radial_only, pressurized };

struct RpeFitConfig {
    PressureRange pressures;
    FitBoundary boundary = FitBoundary::radial_only;

    bool operator==(const RpeFitConfig &) const = default;
};

struct OutputConfig {
    std::string dir = "out";
    bool include_wall_time = true;

    bool operator==(const OutputConfig &) const = default;
};

struct ScenarioConfig {
    GeometryConfig geometry;
    MaterialConfig material;
    RpeConfig rpe;
    ContinuumConfig continuum;
    BodyConfig body;
    DiscretizationConfig discretization;
    shooting::SolverConfig solver;
    ActuationConfig actuation;
    SweepConfig sweep;
    BenchmarkConfig benchmark;
    ConvergenceConfig convergence;
    RpeFitConfig rpe_fit;
    OutputConfig output;

    bool operator==(const ScenarioConfig &) const = default;

    void validate() const;
};

namespace detail {

inline std::string law_name(constitutive::LawKind k) {
    return k == constitutive::LawKind::homogeneous ? "homogeneous" : "inhomogeneous";
}

inline constitutive::LawKind law_from_string(std::string_view name) {
    if (name == "homogeneous") return constitutive::LawKind::homogeneous;
    if (name == "inhomogeneous") return constitutive::LawKind::inhomogeneous;
    throw ParseError("unknown material law '" + std::string(name) + "'");
}

inline std::string initial_name(InitialState s) { return s == InitialState::equilibrium ? "equilibrium" : "rest"; }

inline InitialState initial_from_string(std::string_view name) {
    if (name == "equilibrium") return InitialState::equilibrium;
    if (name == "rest") return InitialState::rest;
    throw ParseError("unknown initial state '" + std::string(name) + "'");
}

inline std::string boundary_name(FitBoundary b) { return b == FitBoundary::radial_only ? "radial-only" : "pressurized"; }

inline FitBoundary boundary_from_string(std::string_view name) {
    if (name == "radial-only") return FitBoundary::radial_only;
    if (name == "pressurized") return FitBoundary::pressurized;
    throw ParseError("unknown fit boundary '" + std::string(name) + "'");
}

/// Reads fields of one JSON object, tracking the dotted path for diagnostics
/// and rejecting keys nobody asked for.
class Reader {
public:
    Reader(const json &node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) {
            throw ParseError(where() + ": expected an object");
        }
    }

    ~Reader() = default;
    Reader(const Reader &) = delete;
    Reader &operator=(const Reader &) = delete;

    std::string field(std::string_view key) const {
        return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
    }

    bool has(std::string_view key) {
        seen_.insert(std::string(key));
        return node_.contains(std::string(key));
    }

    void number(std::string_view key, double &out) {
        if (!has(key)) return;
        const json &v = node_.at(std::string(key));
        if (!v.is_number()) throw ParseError(field(key) + ": expected a number");
        out = v.get<double>();
        if (!std::isfinite(out)) throw ParseError(field(key) + ": not finite");
    }

    void integer(std::string_view key, int &out) {
        if (!has(key)) return;
        const json &v = node_.at(std::string(key));
        if (!v.is_number_integer()) throw ParseError(field(key) + ": expected an integer");
        out = v.get<int>();
    }

    void boolean(std::string_view key, bool &out) {
        if (!has(key)) return;
        const json &v = node_.at(std::string(key));
        if (!v.is_boolean()) throw ParseError(field(key) + ": expected true or false");
        out = v.get<bool>();
    }

    void string(std::string_view key, std::string &out) {
        if (!has(key)) return;
        const json &v = node_.at(std::string(key));
        if (!v.is_string()) throw ParseError(field(key) + ": expected a string");
        out = v.get<std::string>();
    }

    template <class T, class Convert>
    void choice(std::string_view key, T &out, Convert &&convert) {
        std::string name;
        if (!has(key)) return;
        string(key, name);
        try {
            out = convert(name);
        } catch (const ParseError &e) {
            throw ParseError(field(key) + ": " + e.what());
        }
    }

    template <std::size_t N>
    void vector(std::string_view key, std::array<double, N> &out) {
        if (!has(key)) return;
        const json &v = node_.at(std::string(key));
        if (!v.is_array() || v.size() != N) {
            throw ParseError(field(key) + ": expected an array of " + std::to_string(N) + " numbers");
        }
        for (std::size_t k = 0; k < N; ++k) {
            if (!v[k].is_number()) throw ParseError(field(key) + "[" + std::to_string(k) + "]: expected a number");
            out[k] = v[k].get<double>();
        }
    }

    template <class T>
    void list(std::string_view key, std::vector<T> &out) {
        if (!has(key)) return;
        const json &v = node_.at(std::string(key));
        if (!v.is_array()) throw ParseError(field(key) + ": expected an array");
        std::vector<T> tmp;
        for (std::size_t k = 0; k < v.size(); ++k) {
            const bool ok = std::is_integral_v<T> ? v[k].is_number_integer() : v[k].is_number();
            if (!ok) throw ParseError(field(key) + "[" + std::to_string(k) + "]: wrong element type");
            tmp.push_back(v[k].get<T>());
        }
        out = std::move(tmp);
    }

    const json &child(std::string_view key) {
        seen_.insert(std::string(key));
        return node_.at(std::string(key));
    }

    void finish() const {
        for (const auto &item : node_.items()) {
            if (!seen_.count(item.key())) {
                throw ParseError(field(item.key()) + ": unknown key");
            }
        }
    }

    std::string where() const { return path_.empty() ? "<root>" : path_; }

private:
    const json &node_;
    std::string path_;
    std::set<std::string> seen_;
};

inline json signal_to_json(const Signal &s) {
    json j;
    switch (s.kind) {
    case Signal::Kind::constant:
        j["type"] = "constant";
        j["value_bar"] = s.value;
        break;
    case Signal::Kind::ramp:
        j["type"] = "ramp";
        j["start_bar"] = s.start;
        j["end_bar"] = s.end;
        j["t_start_s"] = s.t_start;
        j["t_end_s"] = s.t_end;
        break;
    case Signal::Kind::sinusoid:
        j["type"] = "sinusoid";
        j["mean_bar"] = s.mean;
        j["amplitude_bar"] = s.amplitude;
        j["omega_rad_per_s"] = s.omega;
        j["phase_rad"] = s.phase;
        j["phi0_rad"] = s.phi0;
        break;
    case Signal::Kind::tabulated:
        j["type"] = "tabulated";
        j["t_s"] = s.times;
        j["P_bar"] = s.values;
        break;
    }
    return j;
}

inline Signal signal_from_json(const json &node, const std::string &path) {
    Reader r(node, path);
    std::string type = "constant";
    r.string("type", type);
    Signal s;
    if (type == "constant") {
        r.number("value_bar", s.value);
    } else if (type == "ramp") {
        s.kind = Signal::Kind::ramp;
        r.number("start_bar", s.start);
        r.number("end_bar", s.end);
        r.number("t_start_s", s.t_start);
        r.number("t_end_s", s.t_end);
    } else if (type == "sinusoid") {
        s.kind = Signal::Kind::sinusoid;
        r.number("mean_bar", s.mean);
        r.number("amplitude_bar", s.amplitude);
        r.number("omega_rad_per_s", s.omega);
        r.number("phase_rad", s.phase);
        r.number("phi0_rad", s.phi0);
    } else if (type == "tabulated") {
        s.kind = Signal::Kind::tabulated;
        r.list("t_s", s.times);
        r.list("P_bar", s.values);
    } else {
        throw ParseError(r.field("type") + ": unknown signal type '" + type + "'");
    }
    r.finish();
    try {
        s.validate();
    } catch (const InvalidParameter &e) {
        throw ParseError(path + ": " + e.what());
    }
    return s;
}

/// Byte offset to "line L, column C" of the source text.
inline std::string line_column(const std::string &text, std::size_t offset) {
    offset = std::min(offset, text.size());
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t k = 0; k < offset; ++k) {
        if (text[k] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

} // namespace detail

inline json to_json(const ScenarioConfig &c) {
    json j;
    const auto &g = c.geometry;
    j["geometry"] = {{"b_m", g.b},         {"R_i_m", g.R_i},          {"R_f_m", g.R_f},
                     {"R_o_m", g.R_o},     {"l_o_m", g.l_o},          {"l_cap_m", g.l_cap},
                     {"phi_deg", g.phi_deg}, {"fiber_angle_deg", g.fiber_angle_deg}};
    const auto &m = c.material;
    j["material"] = {{"law", detail::law_name(m.law)},
                     {"E_Pa", m.E},
                     {"a1_per_N", m.a1},
                     {"a2_per_N2", m.a2},
                     {"gamma", m.gamma},
                     {"rho_kg_per_m3", m.rho},
                     {"max_operating_force_N", m.max_operating_force}};
    j["rpe"] = {{"mode", to_string(c.rpe.mode)},
                {"a_per_bar", c.rpe.a},
                {"force_uses_stretch", c.rpe.force_uses_stretch}};
    j["continuum"] = {{"mu_Pa", c.continuum.mu},
                      {"c1", c.continuum.c1},
                      {"c2", c.continuum.c2},
                      {"E_fiber_Pa", c.continuum.E_fiber}};
    j["body"] = {{"gravity_m_per_s2", c.body.gravity},
                 {"cap_mass_kg", c.body.cap_mass},
                 {"self_weight", c.body.self_weight}};
    const auto &d = c.discretization;
    j["discretization"] = {{"nodes", d.nodes},         {"spatial", to_string(d.spatial)},
                           {"scheme", to_string(d.scheme)}, {"alpha", d.alpha},
                           {"dt_s", d.dt},             {"timeframe_s", d.timeframe}};
    const auto &s = c.solver;
    j["solver"] = {{"method", shooting::to_string(s.method)},
                   {"tol_force_N", s.tol_force},
                   {"tol_moment_Nm", s.tol_moment},
                   {"max_iter", s.max_iter},
                   {"fd_step", s.fd_step},
                   {"lm_damping_init", s.lm_damping_init},
                   {"lm_damping_decrease", s.lm_damping_decrease},
                   {"lm_damping_increase", s.lm_damping_increase},
                   {"trust_radius_init", s.trust_radius_init},
                   {"trust_expand", s.trust_expand},
                   {"trust_shrink", s.trust_shrink},
                   {"warm_start", s.warm_start}};
    const auto &a = c.actuation;
    json signals = json::array();
    for (const auto &sig : a.signals) {
        signals.push_back(detail::signal_to_json(sig));
    }
    j["actuation"] = {{"case", to_string(a.drive_case)},
                      {"drive", detail::signal_to_json(a.drive)},
                      {"signals", signals},
                      {"initial_state", detail::initial_name(a.initial)},
                      {"tip_force_N", a.tip_force},
                      {"tip_moment_Nm", a.tip_moment}};
    json cases = json::array();
    for (auto k : c.sweep.cases) {
        cases.push_back(to_string(k));
    }
    auto range = [](const PressureRange &p) {
        return json{{"start_bar", p.start}, {"stop_bar", p.stop}, {"step_bar", p.step}};
    };
    j["sweep"] = {{"cases", cases}, {"pressure", range(c.sweep.pressures)}};
    const auto &b = c.benchmark;
    j["benchmark"] = {{"grid_sizes", b.grid_sizes},
                      {"alphas", b.alphas},
                      {"reference_nodes", b.reference_nodes},
                      {"reference_dt_s", b.reference_dt},
                      {"reference_check_dt_s", b.reference_check_dt},
                      {"reference_alpha", b.reference_alpha},
                      {"use_cache", b.use_cache},
                      {"cache_dir", b.cache_dir}};
    const auto &v = c.convergence;
    j["convergence"] = {{"spatial_intervals", v.spatial_intervals},
                        {"manufactured_bend_angle_rad", v.manufactured_bend_angle},
                        {"temporal_steps_per_second", v.temporal_steps_per_second},
                        {"reference_steps_per_second", v.reference_steps_per_second},
                        {"temporal_alpha", v.temporal_alpha}};
    j["rpe_fit"] = {{"pressure", range(c.rpe_fit.pressures)},
                    {"boundary", detail::boundary_name(c.rpe_fit.boundary)}};
    j["output"] = {{"dir", c.output.dir}, {"include_wall_time", c.output.include_wall_time}};
    return j;
}

inline ScenarioConfig from_json(const json &root) {
    ScenarioConfig c;
    detail::Reader r(root, "");
    if (r.has("geometry")) {
        detail::Reader g(r.child("geometry"), "geometry");
        g.number("b_m", c.geometry.b);
        g.number("R_i_m", c.geometry.R_i);
        g.number("R_f_m", c.geometry.R_f);
        g.number("R_o_m", c.geometry.R_o);
        g.number("l_o_m", c.geometry.l_o);
        g.number("l_cap_m", c.geometry.l_cap);
        g.number("phi_deg", c.geometry.phi_deg);
        g.number("fiber_angle_deg", c.geometry.fiber_angle_deg);
        g.finish();
    }
    if (r.has("material")) {
        detail::Reader m(r.child("material"), "material");
        m.choice("law", c.material.law, detail::law_from_string);
        m.number("E_Pa", c.material.E);
        m.number("a1_per_N", c.material.a1);
        m.number("a2_per_N2", c.material.a2);
        m.number("gamma", c.material.gamma);
        m.number("rho_kg_per_m3", c.material.rho);
        m.number("max_operating_force_N", c.material.max_operating_force);
        m.finish();
    }
    if (r.has("rpe")) {
        detail::Reader p(r.child("rpe"), "rpe");
        p.choice("mode", c.rpe.mode, rpe_mode_from_string);
        p.number("a_per_bar", c.rpe.a);
        p.boolean("force_uses_stretch", c.rpe.force_uses_stretch);
        p.finish();
    }
    if (r.has("continuum")) {
        detail::Reader k(r.child("continuum"), "continuum");
        k.number("mu_Pa", c.continuum.mu);
        k.number("c1", c.continuum.c1);
        k.number("c2", c.continuum.c2);
        k.number("E_fiber_Pa", c.continuum.E_fiber);
        k.finish();
    }
    if (r.has("body")) {
        detail::Reader b(r.child("body"), "body");
        b.vector("gravity_m_per_s2", c.body.gravity);
        b.number("cap_mass_kg", c.body.cap_mass);
        b.boolean("self_weight", c.body.self_weight);
        b.finish();
    }
    if (r.has("discretization")) {
        detail::Reader d(r.child("discretization"), "discretization");
        d.integer("nodes", c.discretization.nodes);
        d.choice("spatial", c.discretization.spatial, spatial_method_from_string);
        d.choice("scheme", c.discretization.scheme, scheme_from_string);
        d.number("alpha", c.discretization.alpha);
        d.number("dt_s", c.discretization.dt);
        d.number("timeframe_s", c.discretization.timeframe);
        d.finish();
    }
    if (r.has("solver")) {
        detail::Reader s(r.child("solver"), "solver");
        s.choice("method", c.solver.method, shooting::method_from_string);
        s.number("tol_force_N", c.solver.tol_force);
        s.number("tol_moment_Nm", c.solver.tol_moment);
        s.integer("max_iter", c.solver.max_iter);
        s.number("fd_step", c.solver.fd_step);
        s.number("lm_damping_init", c.solver.lm_damping_init);
        s.number("lm_damping_decrease", c.solver.lm_damping_decrease);
        s.number("lm_damping_increase", c.solver.lm_damping_increase);
        s.number("trust_radius_init", c.solver.trust_radius_init);
        s.number("trust_expand", c.solver.trust_expand);
        s.number("trust_shrink", c.solver.trust_shrink);
        s.boolean("warm_start", c.solver.warm_start);
        s.finish();
    }
    if (r.has("actuation")) {
        detail::Reader a(r.child("actuation"), "actuation");
        a.choice("case", c.actuation.drive_case, drive_case_from_string);
        if (a.has("drive")) {
            c.actuation.drive = detail::signal_from_json(a.child("drive"), "actuation.drive");
        }
        if (a.has("signals")) {
            const json &list = a.child("signals");
            if (!list.is_array() || list.size() != 3) {
                throw ParseError("actuation.signals: expected an array of 3 signals");
            }
            for (std::size_t k = 0; k < 3; ++k) {
                c.actuation.signals[k] =
                    detail::signal_from_json(list[k], "actuation.signals[" + std::to_string(k) + "]");
            }
        }
        a.choice("initial_state", c.actuation.initial, detail::initial_from_string);
        a.vector("tip_force_N", c.actuation.tip_force);
        a.vector("tip_moment_Nm", c.actuation.tip_moment);
        a.finish();
    }
    auto read_range = [](const json &node, const std::string &path, PressureRange &out) {
        detail::Reader p(node, path);
        p.number("start_bar", out.start);
        p.number("stop_bar", out.stop);
        p.number("step_bar", out.step);
        p.finish();
    };
    if (r.has("sweep")) {
        detail::Reader s(r.child("sweep"), "sweep");
        if (s.has("cases")) {
            const json &list = s.child("cases");
            if (!list.is_array()) throw ParseError("sweep.cases: expected an array");
            c.sweep.cases.clear();
            for (std::size_t k = 0; k < list.size(); ++k) {
                const std::string path = "sweep.cases[" + std::to_string(k) + "]";
                if (!list[k].is_string()) throw ParseError(path + ": expected a string");
                try {
                    c.sweep.cases.push_back(drive_case_from_string(list[k].get<std::string>()));
                } catch (const ParseError &e) {
                    throw ParseError(path + ": " + e.what());
                }
            }
        }
        if (s.has("pressure")) read_range(s.child("pressure"), "sweep.pressure", c.sweep.pressures);
        s.finish();
    }
    if (r.has("benchmark")) {
        detail::Reader b(r.child("benchmark"), "benchmark");
        b.list("grid_sizes", c.benchmark.grid_sizes);
        b.list("alphas", c.benchmark.alphas);
        b.integer("reference_nodes", c.benchmark.reference_nodes);
        b.number("reference_dt_s", c.benchmark.reference_dt);
        b.number("reference_check_dt_s", c.benchmark.reference_check_dt);
        b.number("reference_alpha", c.benchmark.reference_alpha);
        b.boolean("use_cache", c.benchmark.use_cache);
        b.string("cache_dir", c.benchmark.cache_dir);
        b.finish();
    }
    if (r.has("convergence")) {
        detail::Reader v(r.child("convergence"), "convergence");
        v.list("spatial_intervals", c.convergence.spatial_intervals);
        v.number("manufactured_bend_angle_rad", c.convergence.manufactured_bend_angle);
        v.list("temporal_steps_per_second", c.convergence.temporal_steps_per_second);
        v.integer("reference_steps_per_second", c.convergence.reference_steps_per_second);
        v.number("temporal_alpha", c.convergence.temporal_alpha);
        v.finish();
    }
    if (r.has("rpe_fit")) {
        detail::Reader f(r.child("rpe_fit"), "rpe_fit");
        if (f.has("pressure")) read_range(f.child("pressure"), "rpe_fit.pressure", c.rpe_fit.pressures);
        f.choice("boundary", c.rpe_fit.boundary, detail::boundary_from_string);
        f.finish();
    }
    if (r.has("output")) {
        detail::Reader o(r.child("output"), "output");
        o.string("dir", c.output.dir);
        o.boolean("include_wall_time", c.output.include_wall_time);
        o.finish();
    }
    r.finish();
    return c;
}

inline ScenarioConfig parse_config(const std::string &text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error &e) {
        throw ParseError(detail::line_column(text, e.byte == 0 ? 0 : e.byte - 1) + ": " + e.what());
    }
    return from_json(root);
}

inline ScenarioConfig load_config(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read " + path);
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

inline std::string dump_config(const ScenarioConfig &c) { return to_json(c).dump(2) + "\n"; }

inline void save_config(const ScenarioConfig &c, const std::string &path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    out << dump_config(c);
    if (!out) {
        throw IoError("write failed for " + path);
    }
}

/// 64-bit FNV-1a of a string.
inline std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline void ScenarioConfig::validate() const {
    const auto &g = geometry;
    if (!(0.0 < g.R_i && g.R_i < g.R_f && g.R_f < g.R_o)) {
        throw InvalidParameter("geometry: radii must satisfy 0 < R_i < R_f < R_o");
    }
    if (!(g.b > 2.0 * g.R_o / std::sqrt(3.0) && g.l_o > 0.0 && g.l_cap >= 0.0)) {
        throw InvalidParameter("geometry: actuators overlap or lengths are not positive");
    }
    if (std::abs(g.phi_deg - 120.0) > 1e-12) {
        throw InvalidParameter("geometry.phi_deg: only the symmetric 120 degree layout is supported");
    }
    if (!(material.rho > 0.0 && body.cap_mass >= 0.0)) {
        throw InvalidParameter("density must be positive and cap mass non-negative");
    }
    if (discretization.nodes < 2) {
        throw InvalidParameter("discretization.nodes must be at least 2");
    }
    if (!(discretization.dt > 0.0 && discretization.timeframe > 0.0)) {
        throw InvalidParameter("discretization: dt and timeframe must be positive");
    }
    if (std::abs(discretization.timeframe / discretization.dt - discretization.steps()) > 1e-6) {
        throw InvalidParameter("discretization: timeframe must be a whole number of steps");
    }
    make_scheme(discretization.scheme, discretization.dt, discretization.alpha);
    solver.validate();
    actuation.drive.validate();
    for (const auto &s : actuation.signals) {
        s.validate();
    }
    sweep.pressures.levels();
    rpe_fit.pressures.levels();
    for (int n : benchmark.grid_sizes) {
        if (n < 2) throw InvalidParameter("benchmark.grid_sizes entries must be at least 2");
    }
    if (benchmark.reference_nodes < 2 || !(benchmark.reference_dt > 0.0) || !(benchmark.reference_check_dt > 0.0)) {
        throw InvalidParameter("benchmark reference needs nodes >= 2 and positive steps");
    }
    if (convergence.spatial_intervals.size() < 2 || convergence.temporal_steps_per_second.size() < 2) {
        throw InvalidParameter("convergence studies need at least two levels");
    }
}

/// Manipulator model described by the configuration.
inline ManipulatorModel make_model(const ScenarioConfig &c) {
    ManipulatorModel m;
    m.section.b = c.geometry.b;
    m.section.R_i = c.geometry.R_i;
    m.section.R_o = c.geometry.R_o;
    m.law.kind = c.material.law;
    m.law.E_const = c.material.E;
    m.law.a1 = c.material.a1;
    m.law.a2 = c.material.a2;
    m.law.gamma = c.material.gamma;
    m.law.rho = c.material.rho;
    m.law.max_operating_force = c.material.max_operating_force;
    m.law.validate();
    m.length = c.geometry.l_o;
    m.rpe_mode = c.rpe.mode;
    m.rpe.a = c.rpe.a;
    m.rpe_force_uses_stretch = c.rpe.force_uses_stretch;
    m.gravity = Vec3(c.body.gravity[0], c.body.gravity[1], c.body.gravity[2]);
    m.cap_mass = c.body.cap_mass;
    m.self_weight = c.body.self_weight;
    return m;
}

inline actuator::ActuatorGeometry actuator_geometry(const ScenarioConfig &c) {
    actuator::ActuatorGeometry g;
    g.R_i = c.geometry.R_i;
    g.R_m = c.geometry.R_f;
    g.R_o = c.geometry.R_o;
    g.psi = c.geometry.fiber_angle_deg * std::numbers::pi / 180.0;
    g.L0 = c.geometry.l_o;
    return g;
}

inline actuator::HyperelasticParams hyperelastic_params(const ScenarioConfig &c) {
    return {c.continuum.mu, c.continuum.c1, c.continuum.c2, c.continuum.E_fiber};
}

/// Per-actuator programs after expanding a preset case.
inline std::array<Signal, 3> actuator_signals(const ActuationConfig &a) {
    if (a.drive_case == DriveCase::custom) {
        return a.signals;
    }
    const auto mask = driven_actuators(a.drive_case);
    std::array<Signal, 3> out;
    for (int i = 0; i < 3; ++i) {
        out[i] = mask[i] ? a.drive : Signal::constant(0.0);
    }
    return out;
}

/// Loads at time t.
inline ActuationInput input_at(const ActuationConfig &a, double t) {
    const auto signals = actuator_signals(a);
    ActuationInput in;
    for (int i = 0; i < 3; ++i) {
        in.pressures_bar[i] = signals[i](t);
        if (in.pressures_bar[i] < 0.0) {
            throw InvalidParameter("actuator " + std::to_string(i + 1) + " pressure is negative at t = " +
                                   std::to_string(t));
        }
    }
    in.tip_force = Vec3(a.tip_force[0], a.tip_force[1], a.tip_force[2]);
    in.tip_moment = Vec3(a.tip_moment[0], a.tip_moment[1], a.tip_moment[2]);
    return in;
}

/// Static loads with every actuator in `c` held at `pressure_bar`.
inline ActuationInput static_input(DriveCase c, double pressure_bar) {
    const auto mask = driven_actuators(c);
    ActuationInput in;
    for (int i = 0; i < 3; ++i) {
        in.pressures_bar[i] = mask[i] ? pressure_bar : 0.0;
    }
    return in;
}

} // namespace softrod::scenario
