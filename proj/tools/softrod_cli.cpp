// softrod: batch driver for static sweeps, dynamic runs, method benchmarks,
// convergence studies and the actuator RPE fit.
//
// exit codes: 0 success, 1 i/o failure, 2 configuration error,
//             3 solver non-convergence, 4 instability in a dynamic run

#include <softrod/config.hpp>
#include <softrod/scenario.hpp>
#include <softrod/study.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace softrod;
using namespace softrod::scenario;

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNoConvergence = 3;
constexpr int kExitUnstable = 4;

struct Overrides {
    std::string config_path;
    std::string out_dir;
    std::optional<std::string> drive_case;
    std::optional<std::string> scheme;
    std::optional<double> alpha;
    std::optional<std::string> spatial;
    std::optional<int> nodes;
    std::optional<double> dt;
    std::optional<double> timeframe;
    std::optional<std::string> rpe_mode;
    std::optional<std::string> material;
};

void add_common(CLI::App *cmd, Overrides &o) {
    cmd->add_option("--config", o.config_path, "scenario file (JSON); built-in defaults when omitted");
    cmd->add_option("--out", o.out_dir, "output directory");
    cmd->add_option("--case", o.drive_case, "driven actuators")->check(CLI::IsMember({"a", "b", "all"}));
    cmd->add_option("--scheme", o.scheme, "bdf1 | bdf2 | bdf3 | bdf-alpha | trapezoidal");
    cmd->add_option("--alpha", o.alpha, "BDF-alpha parameter in [-0.5, 0]");
    cmd->add_option("--spatial", o.spatial, "euler | rk4");
    cmd->add_option("--nodes", o.nodes, "grid nodes along the rod");
    cmd->add_option("--dt", o.dt, "time step, s");
    cmd->add_option("--timeframe", o.timeframe, "simulated time, s");
    cmd->add_option("--rpe-mode", o.rpe_mode, "equivalent-force | strain-transfer | off");
    cmd->add_option("--material", o.material, "homogeneous | inhomogeneous")
        ->check(CLI::IsMember({"homogeneous", "inhomogeneous"}));
}

ScenarioConfig resolve(const Overrides &o) {
    ScenarioConfig cfg = o.config_path.empty() ? ScenarioConfig{} : load_config(o.config_path);
    if (!o.out_dir.empty()) cfg.output.dir = o.out_dir;
    if (o.drive_case) {
        const DriveCase c = drive_case_from_string(*o.drive_case);
        cfg.actuation.drive_case = c;
        cfg.sweep.cases = {c};
    }
    auto &d = cfg.discretization;
    if (o.scheme) d.scheme = scheme_from_string(*o.scheme);
    if (o.alpha) d.alpha = *o.alpha;
    if (o.spatial) d.spatial = spatial_method_from_string(*o.spatial);
    if (o.nodes) d.nodes = *o.nodes;
    if (o.dt) d.dt = *o.dt;
    if (o.timeframe) d.timeframe = *o.timeframe;
    if (o.rpe_mode) cfg.rpe.mode = rpe_mode_from_string(*o.rpe_mode);
    if (o.material) cfg.material.law = scenario::detail::law_from_string(*o.material);
    cfg.validate();
    return cfg;
}

int cmd_static_sweep(const ScenarioConfig &cfg) {
    const std::filesystem::path out = cfg.output.dir;
    const SweepRecord rec = run_static_sweep(cfg);
    for (DriveCase c : cfg.sweep.cases) {
        export_sweep_backbones(rec, c, out / ("static_backbone_case_" + to_string(c) + ".csv"),
                               cfg.output.include_wall_time);
    }
    export_sweep_tcp(rec, out / "static_tcp.csv");
    int failed = 0;
    for (const auto &level : rec.levels) {
        if (level.converged) {
            const Vec3 &p = level.frame.tip();
            std::printf("case %-3s P = %.2f bar  TCP = (%+.6f, %+.6f, %+.6f) m  iters %d\n",
                        to_string(level.drive_case).c_str(), level.pressure_bar, p.x(), p.y(), p.z(),
                        level.frame.iterations);
        } else {
            ++failed;
            std::printf("case %-3s P = %.2f bar  FAILED: %s\n", to_string(level.drive_case).c_str(),
                        level.pressure_bar, level.error.c_str());
        }
    }
    return failed == 0 ? kExitOk : kExitNoConvergence;
}

int cmd_dynamic(const ScenarioConfig &cfg) {
    const std::filesystem::path out = cfg.output.dir;
    const TrajectoryRecord rec = run_dynamic(cfg);
    export_trajectory(rec, out / "trajectory.csv", cfg.output.include_wall_time);
    json summary = trajectory_summary(rec);
    if (!cfg.output.include_wall_time) {
        summary["runtime_s"] = 0.0;
    }
    write_text(out / "summary.json", summary.dump(2) + "\n");
    std::printf("%s: %zu frames, %.4f s marching\n", to_string(rec.status).c_str(), rec.frames.size(),
                rec.runtime_s);
    switch (rec.status) {
    case RunStatus::completed: return kExitOk;
    case RunStatus::blowup:
        std::fprintf(stderr, "unstable at step %d: %s\n", rec.failed_step, rec.message.c_str());
        return kExitUnstable;
    case RunStatus::no_convergence:
        std::fprintf(stderr, "no convergence at step %d: %s\n", rec.failed_step, rec.message.c_str());
        return kExitNoConvergence;
    }
    return kExitOk;
}

int cmd_benchmark(const ScenarioConfig &cfg) {
    const std::filesystem::path out = cfg.output.dir;
    const BenchmarkTable table = benchmark_methods(cfg, out);
    const std::string text = render_table(table, cfg.benchmark.grid_sizes, cfg.benchmark);
    write_text(out / "benchmark.json", to_json(table).dump(2) + "\n");
    write_text(out / "benchmark.txt", text);
    std::fputs(text.c_str(), stdout);
    return kExitOk;
}

int cmd_convergence(const ScenarioConfig &cfg) {
    const std::filesystem::path out = cfg.output.dir;
    const ConvergenceReport rep = run_convergence_study(cfg);
    const std::string text = render_report(rep);
    write_text(out / "convergence.json", to_json(rep).dump(2) + "\n");
    write_text(out / "convergence.txt", text);
    std::fputs(text.c_str(), stdout);
    return kExitOk;
}

int cmd_rpe_fit(const ScenarioConfig &cfg) {
    const std::filesystem::path out = cfg.output.dir;
    const RpeFitReport rep = run_rpe_fit(cfg);
    write_text(out / "rpe_fit.json", to_json(rep).dump(2) + "\n");
    std::printf("lambda_z = %.8f P + 1   (P in bar, R^2 = %.6f)\n", rep.fit.a, rep.fit.r_squared);
    return kExitOk;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Cosserat rod simulation of a three-actuator soft manipulator"};
    app.require_subcommand(1);
    Overrides o;
    struct Command {
        const char *name;
        const char *help;
        int (*run)(const ScenarioConfig &);
    };
    const Command commands[] = {
        {"static-sweep", "static solves over a pressure range", cmd_static_sweep},
        {"dynamic", "time-marched run of the actuation program", cmd_dynamic},
        {"benchmark", "spatial method x time scheme x grid comparison", cmd_benchmark},
        {"convergence", "observed spatial and temporal orders", cmd_convergence},
        {"rpe-fit", "actuator continuum model and pressure-stretch fit", cmd_rpe_fit},
    };
    for (const auto &c : commands) {
        add_common(app.add_subcommand(c.name, c.help), o);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        const ScenarioConfig cfg = resolve(o);
        for (const auto &c : commands) {
            if (app.got_subcommand(c.name)) {
                return c.run(cfg);
            }
        }
    } catch (const ParseError &e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const InvalidParameter &e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const NonPositiveStiffness &e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const IoError &e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return kExitIo;
    } catch (const NumericalBlowup &e) {
        std::fprintf(stderr, "unstable: %s\n", e.what());
        return kExitUnstable;
    } catch (const Error &e) {
        std::fprintf(stderr, "solver error: %s\n", e.what());
        return kExitNoConvergence;
    }
    return kExitOk;
}
