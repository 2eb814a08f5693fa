#pragma once

// Scenario execution: static pressure sweeps and dynamic runs, with every
// exported backbone point moved from the neutral axis to the central axis.

#include <softrod/config.hpp>
#include <softrod/simulation.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace softrod::scenario {

/// Central-axis point p_C = p_Na + D_Na - R D_Na.
inline Vec3 central_axis_transform(const Vec3 &p_na, const Mat3 &R, const Vec3 &D_na) {
    return p_na + D_na - R * D_na;
}

/// One exported snapshot of the rod.
struct Frame {
    double t = 0.0;
    std::vector<Vec3> points;          ///< central axis, global
    std::vector<Quaternion> orientations;
    PerActuator pressures{0.0, 0.0, 0.0};
    int iterations = 0;
    double wall_ms = 0.0;

    const Vec3 &tip() const { return points.back(); }
};

inline Frame make_frame(double t, const RodState &state, const constitutive::SectionState &section,
                        const PerActuator &pressures, int iterations, double wall_ms) {
    Frame f;
    f.t = t;
    f.pressures = pressures;
    f.iterations = iterations;
    f.wall_ms = wall_ms;
    f.points.reserve(state.size());
    f.orientations.reserve(state.size());
    for (const auto &node : state.nodes) {
        const Mat3 R = quat_to_rotation(node.h);
        f.points.push_back(central_axis_transform(node.p, R, section.D_Na));
        f.orientations.push_back(normalized(node.h));
    }
    return f;
}

enum class RunStatus { completed, blowup, no_convergence };

inline std::string to_string(RunStatus s) {
    switch (s) {
    case RunStatus::completed: return "completed";
    case RunStatus::blowup: return "blowup";
    case RunStatus::no_convergence: return "no-convergence";
    }
    return "unknown";
}

struct TrajectoryRecord {
    std::vector<double> grid;
    std::vector<Frame> frames;
    RunStatus status = RunStatus::completed;
    int failed_step = -1;     ///< 1-based step that failed
    std::string message;
    double runtime_s = 0.0;   ///< marching only, initial equilibrium excluded

    bool stable() const { return status == RunStatus::completed; }
};

struct SweepLevel {
    DriveCase drive_case = DriveCase::a;
    double pressure_bar = 0.0;
    bool converged = false;
    std::string error;
    Frame frame;
};

struct SweepRecord {
    std::vector<double> grid;
    std::vector<SweepLevel> levels;

    bool all_converged() const {
        return std::all_of(levels.begin(), levels.end(), [](const SweepLevel &l) { return l.converged; });
    }
};

/// Static solve at every configured pressure level of every configured case.
/// A failed level is recorded and the sweep moves on; levels of one case
/// warm-start from the last converged level.
inline SweepRecord run_static_sweep(const ScenarioConfig &cfg) {
    cfg.validate();
    const ManipulatorModel model = make_model(cfg);
    const auto grid = uniform_grid(model.length, static_cast<std::size_t>(cfg.discretization.nodes));
    SweepRecord out;
    out.grid = grid;
    for (DriveCase c : cfg.sweep.cases) {
        std::optional<Vec6> guess;
        for (double p : cfg.sweep.pressures.levels()) {
            SweepLevel level;
            level.drive_case = c;
            level.pressure_bar = p;
            ActuationInput in = static_input(c, p);
            in.tip_force = Vec3(cfg.actuation.tip_force[0], cfg.actuation.tip_force[1], cfg.actuation.tip_force[2]);
            in.tip_moment =
                Vec3(cfg.actuation.tip_moment[0], cfg.actuation.tip_moment[1], cfg.actuation.tip_moment[2]);
            const auto start = std::chrono::steady_clock::now();
            try {
                const StaticResult res =
                    static_solve(model, in, grid, cfg.discretization.spatial, cfg.solver, cfg.solver.warm_start ? guess : std::nullopt);
                const double ms =
                    std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
                level.frame = make_frame(0.0, res.solution.state, res.section, in.pressures_bar,
                                         res.solution.iterations, ms);
                level.converged = true;
                guess = res.solution.guess;
            } catch (const Error &e) {
                level.error = e.what();
                level.frame.pressures = in.pressures_bar;
            }
            out.levels.push_back(std::move(level));
        }
    }
    return out;
}

/// Marches the configured actuation program over the timeframe. A blowup or
/// a step the shooting solver cannot close ends the run and is recorded with
/// its step index.
inline TrajectoryRecord run_dynamic(const ScenarioConfig &cfg) {
    cfg.validate();
    const auto &d = cfg.discretization;
    const ManipulatorModel model = make_model(cfg);
    const auto grid = uniform_grid(model.length, static_cast<std::size_t>(d.nodes));
    Simulator sim(model, grid, d.spatial, make_scheme(d.scheme, d.dt, d.alpha), cfg.solver);

    TrajectoryRecord rec;
    rec.grid = grid;
    ActuationInput start_input = input_at(cfg.actuation, 0.0);
    if (cfg.actuation.initial == InitialState::rest) {
        start_input.pressures_bar = {0.0, 0.0, 0.0};
    }
    const auto t0 = std::chrono::steady_clock::now();
    const StaticResult &init = sim.initialize(start_input);
    const double init_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    rec.frames.push_back(make_frame(0.0, init.solution.state, init.section, start_input.pressures_bar,
                                    init.solution.iterations, init_ms));

    const int steps = d.steps();
    const auto march_start = std::chrono::steady_clock::now();
    for (int k = 1; k <= steps; ++k) {
        const double t = k * d.dt;
        const ActuationInput in = input_at(cfg.actuation, t);
        try {
            const StepResult step = sim.step(in);
            rec.frames.push_back(
                make_frame(t, step.state, step.section, in.pressures_bar, step.iterations, step.wall_ms));
        } catch (const NumericalBlowup &e) {
            rec.status = RunStatus::blowup;
            rec.failed_step = k;
            rec.message = e.what();
            break;
        } catch (const NoConvergence &e) {
            rec.status = RunStatus::no_convergence;
            rec.failed_step = k;
            rec.message = e.what();
            break;
        }
    }
    rec.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - march_start).count();
    return rec;
}

// ---------------------------------------------------------------- export

inline constexpr const char *kTrajectoryHeader = "t,node_index,s,x,y,z,h1,h2,h3,h4,P1,P2,P3,iters,step_wall_ms";

/// Shortest-exact decimal rendering, independent of locale and stream state.
inline std::string format_number(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace detail {

inline std::ofstream open_for_write(const std::filesystem::path &path) {
    std::error_code ec;
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) {
            throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
        }
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    return out;
}

inline void close_checked(std::ofstream &out, const std::filesystem::path &path) {
    out.close();
    if (!out) {
        throw IoError("write failed for " + path.string());
    }
}

inline void write_frame_rows(std::ostream &out, double t, const Frame &f, const std::vector<double> &grid,
                             bool include_wall_time) {
    for (std::size_t i = 0; i < f.points.size(); ++i) {
        const Vec3 &p = f.points[i];
        const Quaternion &h = f.orientations[i];
        out << format_number(t) << ',' << i << ',' << format_number(grid[i]) << ',' << format_number(p.x()) << ','
            << format_number(p.y()) << ',' << format_number(p.z()) << ',' << format_number(h[0]) << ','
            << format_number(h[1]) << ',' << format_number(h[2]) << ',' << format_number(h[3]) << ','
            << format_number(f.pressures[0]) << ',' << format_number(f.pressures[1]) << ','
            << format_number(f.pressures[2]) << ',' << f.iterations << ','
            << format_number(include_wall_time ? f.wall_ms : 0.0) << '\n';
    }
}

} // namespace detail

/// One row per (frame, node).
inline void export_trajectory(const TrajectoryRecord &rec, const std::filesystem::path &path,
                              bool include_wall_time) {
    auto out = detail::open_for_write(path);
    out << kTrajectoryHeader << '\n';
    for (const auto &f : rec.frames) {
        detail::write_frame_rows(out, f.t, f, rec.grid, include_wall_time);
    }
    detail::close_checked(out, path);
}

/// Run status and tip path as JSON.
inline json trajectory_summary(const TrajectoryRecord &rec) {
    json tip = json::array();
    for (const auto &f : rec.frames) {
        tip.push_back({f.t, f.tip().x(), f.tip().y(), f.tip().z()});
    }
    return {{"status", to_string(rec.status)},
            {"failed_step", rec.failed_step},
            {"message", rec.message},
            {"frames", rec.frames.size()},
            {"runtime_s", rec.runtime_s},
            {"tip_t_x_y_z_m", tip}};
}

/// Backbones of a sweep in trajectory layout: the t column holds the load-level
/// index within its case. Failed levels have no rows.
inline void export_sweep_backbones(const SweepRecord &rec, DriveCase c, const std::filesystem::path &path,
                                   bool include_wall_time) {
    auto out = detail::open_for_write(path);
    out << kTrajectoryHeader << '\n';
    int index = 0;
    for (const auto &level : rec.levels) {
        if (level.drive_case != c) {
            continue;
        }
        if (level.converged) {
            detail::write_frame_rows(out, static_cast<double>(index), level.frame, rec.grid, include_wall_time);
        }
        ++index;
    }
    detail::close_checked(out, path);
}

/// Tool center point of every level, including failures.
inline void export_sweep_tcp(const SweepRecord &rec, const std::filesystem::path &path) {
    auto out = detail::open_for_write(path);
    out << "case,level,P_bar,status,x,y,z,h1,h2,h3,h4,iters,message\n";
    std::array<int, 4> counters{};
    for (const auto &level : rec.levels) {
        const int index = counters[static_cast<int>(level.drive_case)]++;
        out << to_string(level.drive_case) << ',' << index << ',' << format_number(level.pressure_bar) << ',';
        if (level.converged) {
            const Vec3 &p = level.frame.tip();
            const Quaternion &h = level.frame.orientations.back();
            out << "converged," << format_number(p.x()) << ',' << format_number(p.y()) << ','
                << format_number(p.z()) << ',' << format_number(h[0]) << ',' << format_number(h[1]) << ','
                << format_number(h[2]) << ',' << format_number(h[3]) << ',' << level.frame.iterations << ",\n";
        } else {
            std::string msg = level.error;
            std::replace(msg.begin(), msg.end(), '"', '\'');
            out << "failed,,,,,,,,,\"" << msg << "\"\n";
        }
    }
    detail::close_checked(out, path);
}

inline void write_text(const std::filesystem::path &path, const std::string &text) {
    auto out = detail::open_for_write(path);
    out << text;
    detail::close_checked(out, path);
}

} // namespace softrod::scenario
