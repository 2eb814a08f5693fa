#pragma once

// Method comparison and convergence studies. The benchmark runs every
// (spatial method, time scheme, grid size) cell over the configured timeframe
// and scores each against a fine, cached reference run. The convergence study
// estimates observed orders from log-log regression of error against step size.

#include <softrod/config.hpp>
#include <softrod/scenario.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace softrod::scenario {

struct SchemeChoice {
    SchemeKind kind = SchemeKind::bdf1;
    double alpha = 0.0;

    std::string label() const {
        switch (kind) {
        case SchemeKind::bdf1: return "BDF1";
        case SchemeKind::bdf2: return "BDF2";
        case SchemeKind::bdf3: return "BDF3";
        case SchemeKind::trapezoidal: return "Trapezoidal";
        case SchemeKind::bdf_alpha: {
            char buf[32];
            std::snprintf(buf, sizeof buf, "BDF-alpha %.2g", alpha);
            return buf;
        }
        }
        return "unknown";
    }
};

/// Row order of the comparison table.
inline std::vector<SchemeChoice> benchmark_schemes(const BenchmarkConfig &b) {
    std::vector<SchemeChoice> out{{SchemeKind::bdf1, 0.0}, {SchemeKind::bdf2, 0.0}};
    for (double a : b.alphas) {
        out.push_back({SchemeKind::bdf_alpha, a});
    }
    out.push_back({SchemeKind::trapezoidal, -0.5});
    out.push_back({SchemeKind::bdf3, 0.0});
    return out;
}

/// Tip positions at t = k * frame_dt, k = 1..count, read from a run whose step
/// divides frame_dt. Empty if the run stopped early.
inline std::vector<Vec3> sample_tip(const TrajectoryRecord &rec, double run_dt, double frame_dt, int count) {
    const double ratio = frame_dt / run_dt;
    const auto stride = static_cast<std::size_t>(std::llround(ratio));
    if (stride == 0 || std::abs(ratio - static_cast<double>(stride)) > 1e-6 * ratio) {
        throw InvalidParameter("frame spacing must be a whole multiple of the run step");
    }
    std::vector<Vec3> out;
    for (int k = 1; k <= count; ++k) {
        const std::size_t idx = static_cast<std::size_t>(k) * stride;
        if (idx >= rec.frames.size()) {
            return {};
        }
        out.push_back(rec.frames[idx].tip());
    }
    return out;
}

/// Root mean square of the tip distance over matching samples.
inline double tip_rmse(const std::vector<Vec3> &a, const std::vector<Vec3> &b) {
    if (a.size() != b.size() || a.empty()) {
        throw GridMismatch("tip sample sets differ in length");
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        sum += (a[k] - b[k]).squaredNorm();
    }
    return std::sqrt(sum / static_cast<double>(a.size()));
}

struct ReferenceSolution {
    std::vector<Vec3> tip;          ///< at the benchmark frame times
    double richardson_error = 0.0;  ///< estimated error of the reference, m
    bool from_cache = false;
    double runtime_s = 0.0;
    std::string key;
};

struct BenchmarkCell {
    SpatialMethod spatial = SpatialMethod::rk4;
    SchemeChoice scheme;
    int nodes = 0;
    RunStatus status = RunStatus::completed;
    int failed_step = -1;
    std::string message;
    double runtime_s = 0.0;
    double rmse = std::numeric_limits<double>::quiet_NaN();  ///< m

    bool stable() const { return status == RunStatus::completed; }
};

struct BenchmarkTable {
    std::vector<BenchmarkCell> cells;
    ReferenceSolution reference;
    double frame_dt = 0.0;
    int frames = 0;

    const BenchmarkCell &cell(SpatialMethod m, SchemeKind k, double alpha, int nodes) const {
        for (const auto &c : cells) {
            if (c.spatial == m && c.scheme.kind == k && c.nodes == nodes &&
                (k != SchemeKind::bdf_alpha || std::abs(c.scheme.alpha - alpha) < 1e-12)) {
                return c;
            }
        }
        throw InvalidParameter("no such benchmark cell");
    }
};

/// Configuration of one benchmark or study run.
inline ScenarioConfig with_method(ScenarioConfig cfg, SpatialMethod m, SchemeChoice s, int nodes, double dt) {
    cfg.discretization.spatial = m;
    cfg.discretization.scheme = s.kind;
    cfg.discretization.alpha = s.kind == SchemeKind::bdf_alpha ? s.alpha : cfg.discretization.alpha;
    cfg.discretization.nodes = nodes;
    cfg.discretization.dt = dt;
    return cfg;
}

/// Everything the reference depends on, as text for hashing and cache checks.
inline std::string reference_key(const ScenarioConfig &cfg) {
    const json all = to_json(cfg);
    json key;
    for (const char *section : {"geometry", "material", "rpe", "body", "solver", "actuation"}) {
        key[section] = all[section];
    }
    key["frame_dt_s"] = cfg.discretization.dt;
    key["timeframe_s"] = cfg.discretization.timeframe;
    key["reference"] = {{"nodes", cfg.benchmark.reference_nodes},
                        {"dt_s", cfg.benchmark.reference_dt},
                        {"check_dt_s", cfg.benchmark.reference_check_dt},
                        {"alpha", cfg.benchmark.reference_alpha}};
    return key.dump();
}

inline std::filesystem::path reference_cache_path(const ScenarioConfig &cfg, const std::filesystem::path &out_dir) {
    const std::filesystem::path dir = cfg.benchmark.cache_dir.empty() ? out_dir : std::filesystem::path(cfg.benchmark.cache_dir);
    char name[64];
    std::snprintf(name, sizeof name, "reference_%016llx.json",
                  static_cast<unsigned long long>(fnv1a(reference_key(cfg))));
    return dir / name;
}

namespace detail {

inline std::optional<ReferenceSolution> load_reference(const std::filesystem::path &path, const std::string &key) {
    std::ifstream in(path);
    if (!in) {
        return std::nullopt;
    }
    try {
        const json j = json::parse(in);
        if (j.at("key").get<std::string>() != key) {
            return std::nullopt;
        }
        ReferenceSolution ref;
        for (const auto &p : j.at("tip_m")) {
            ref.tip.emplace_back(p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>());
        }
        ref.richardson_error = j.at("richardson_error_m").get<double>();
        ref.runtime_s = j.at("runtime_s").get<double>();
        ref.from_cache = true;
        ref.key = key;
        return ref;
    } catch (const json::exception &) {
        return std::nullopt;
    }
}

inline void store_reference(const std::filesystem::path &path, const ReferenceSolution &ref) {
    json tip = json::array();
    for (const auto &p : ref.tip) {
        tip.push_back({p.x(), p.y(), p.z()});
    }
    const json j = {{"key", ref.key},
                    {"richardson_error_m", ref.richardson_error},
                    {"runtime_s", ref.runtime_s},
                    {"tip_m", tip}};
    write_text(path, j.dump() + "\n");
}

inline TrajectoryRecord run_checked(const ScenarioConfig &cfg, const char *what) {
    TrajectoryRecord rec = run_dynamic(cfg);
    if (!rec.stable()) {
        throw NoConvergence(std::string(what) + " run failed at step " + std::to_string(rec.failed_step) + ": " +
                                rec.message,
                            std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
                            rec.failed_step);
    }
    return rec;
}

} // namespace detail

/// Fine run (RK4, BDF-alpha, reference grid and step) sampled at the frame
/// times, with a Richardson estimate of its own error from a run at the
/// coarser check step.
inline ReferenceSolution compute_reference(const ScenarioConfig &cfg) {
    const auto &b = cfg.benchmark;
    const double frame_dt = cfg.discretization.dt;
    const int frames = cfg.discretization.steps();
    const SchemeChoice scheme{SchemeKind::bdf_alpha, b.reference_alpha};
    const auto start = std::chrono::steady_clock::now();
    const auto fine = detail::run_checked(
        with_method(cfg, SpatialMethod::rk4, scheme, b.reference_nodes, b.reference_dt), "reference");
    const auto check = detail::run_checked(
        with_method(cfg, SpatialMethod::rk4, scheme, b.reference_nodes, b.reference_check_dt), "reference check");
    ReferenceSolution ref;
    ref.tip = sample_tip(fine, b.reference_dt, frame_dt, frames);
    const auto coarse = sample_tip(check, b.reference_check_dt, frame_dt, frames);
    const double ratio = b.reference_check_dt / b.reference_dt;
    ref.richardson_error = tip_rmse(ref.tip, coarse) / (ratio * ratio - 1.0);
    ref.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    ref.key = reference_key(cfg);
    return ref;
}

/// Reference from the cache when present, computed and stored otherwise.
inline ReferenceSolution cached_reference(const ScenarioConfig &cfg, const std::filesystem::path &out_dir) {
    const std::string key = reference_key(cfg);
    const auto path = reference_cache_path(cfg, out_dir);
    if (cfg.benchmark.use_cache) {
        if (auto ref = detail::load_reference(path, key)) {
            return *ref;
        }
    }
    ReferenceSolution ref = compute_reference(cfg);
    if (cfg.benchmark.use_cache) {
        detail::store_reference(path, ref);
    }
    return ref;
}

/// Runs one benchmark cell and scores it against `ref`.
inline BenchmarkCell run_cell(const ScenarioConfig &cfg, SpatialMethod m, SchemeChoice s, int nodes,
                              const ReferenceSolution *ref) {
    BenchmarkCell cell;
    cell.spatial = m;
    cell.scheme = s;
    cell.nodes = nodes;
    const TrajectoryRecord rec = run_dynamic(with_method(cfg, m, s, nodes, cfg.discretization.dt));
    cell.status = rec.status;
    cell.failed_step = rec.failed_step;
    cell.message = rec.message;
    cell.runtime_s = rec.runtime_s;
    if (rec.stable() && ref != nullptr) {
        const double dt = cfg.discretization.dt;
        cell.rmse = tip_rmse(sample_tip(rec, dt, dt, cfg.discretization.steps()), ref->tip);
    }
    return cell;
}

/// Full method comparison. Cells run one after another so their wall-clock
/// times do not contend.
inline BenchmarkTable benchmark_methods(const ScenarioConfig &cfg, const std::filesystem::path &out_dir) {
    cfg.validate();
    BenchmarkTable table;
    table.frame_dt = cfg.discretization.dt;
    table.frames = cfg.discretization.steps();
    table.reference = cached_reference(cfg, out_dir);
    for (SpatialMethod m : {SpatialMethod::euler, SpatialMethod::rk4}) {
        for (const SchemeChoice &s : benchmark_schemes(cfg.benchmark)) {
            for (int n : cfg.benchmark.grid_sizes) {
                table.cells.push_back(run_cell(cfg, m, s, n, &table.reference));
            }
        }
    }
    return table;
}

inline json to_json(const BenchmarkTable &t) {
    json cells = json::array();
    for (const auto &c : t.cells) {
        cells.push_back({{"spatial", to_string(c.spatial)},
                         {"scheme", to_string(c.scheme.kind)},
                         {"alpha", c.scheme.alpha},
                         {"nodes", c.nodes},
                         {"status", to_string(c.status)},
                         {"stable", c.stable()},
                         {"failed_step", c.failed_step},
                         {"runtime_s", c.runtime_s},
                         {"rmse_m", c.stable() ? json(c.rmse) : json(nullptr)},
                         {"message", c.message}});
    }
    return {{"frame_dt_s", t.frame_dt},
            {"frames", t.frames},
            {"reference",
             {{"richardson_error_m", t.reference.richardson_error},
              {"from_cache", t.reference.from_cache},
              {"runtime_s", t.reference.runtime_s}}},
            {"cells", cells}};
}

/// Aligned text table: one row per (spatial method, scheme), runtime and RMSE
/// columns per grid size.
inline std::string render_table(const BenchmarkTable &t, const std::vector<int> &grid_sizes,
                                 const BenchmarkConfig &b) {
    std::ostringstream out;
    out << std::left << std::setw(8) << "spatial" << std::setw(18) << "time scheme";
    for (int n : grid_sizes) {
        out << std::right << std::setw(14) << ("runtime N=" + std::to_string(n));
    }
    for (int n : grid_sizes) {
        out << std::right << std::setw(14) << ("RMSE N=" + std::to_string(n));
    }
    out << '\n';
    for (SpatialMethod m : {SpatialMethod::euler, SpatialMethod::rk4}) {
        for (const SchemeChoice &s : benchmark_schemes(b)) {
            out << std::left << std::setw(8) << to_string(m) << std::setw(18) << s.label();
            std::vector<const BenchmarkCell *> row;
            for (int n : grid_sizes) {
                row.push_back(&t.cell(m, s.kind, s.alpha, n));
            }
            for (const auto *c : row) {
                char buf[32];
                if (c->stable()) {
                    std::snprintf(buf, sizeof buf, "%.4f s", c->runtime_s);
                } else {
                    std::snprintf(buf, sizeof buf, "%s", c->status == RunStatus::blowup ? "Unstable" : "Failed");
                }
                out << std::right << std::setw(14) << buf;
            }
            for (const auto *c : row) {
                char buf[32];
                if (c->stable()) {
                    std::snprintf(buf, sizeof buf, "%.4f mm", c->rmse * 1e3);
                } else {
                    std::snprintf(buf, sizeof buf, "%s", c->status == RunStatus::blowup ? "Unstable" : "Failed");
                }
                out << std::right << std::setw(14) << buf;
            }
            out << '\n';
        }
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "reference error estimate %.3e m%s\n", t.reference.richardson_error,
                  t.reference.from_cache ? " (cached)" : "");
    out << buf;
    return out.str();
}

// ------------------------------------------------------------ convergence

struct OrderFit {
    std::vector<double> step;
    std::vector<double> error;
    double slope = 0.0;
    double r_squared = 0.0;
};

/// Least-squares line through (log h, log e).
inline OrderFit fit_order(std::vector<double> h, std::vector<double> e) {
    if (h.size() != e.size() || h.size() < 2) {
        throw DegenerateSamples("order fit needs at least two matching levels");
    }
    const double n = static_cast<double>(h.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < h.size(); ++k) {
        if (!(h[k] > 0.0 && e[k] > 0.0)) {
            throw DegenerateSamples("steps and errors must be positive for a log-log fit");
        }
        const double x = std::log(h[k]);
        const double y = std::log(e[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    const double vxx = sxx - sx * sx / n;
    const double vxy = sxy - sx * sy / n;
    const double vyy = syy - sy * sy / n;
    if (!(vxx > 0.0)) {
        throw DegenerateSamples("all step sizes are equal");
    }
    OrderFit fit;
    fit.step = std::move(h);
    fit.error = std::move(e);
    fit.slope = vxy / vxx;
    fit.r_squared = vyy > 0.0 ? vxy * vxy / (vxx * vyy) : 1.0;
    return fit;
}

/// Exact tip of a rod bent by a pure tip moment into a circular arc about x.
inline Vec3 arc_tip(double curvature, double length) {
    const double theta = curvature * length;
    return Vec3(0.0, (std::cos(theta) - 1.0) / curvature, std::sin(theta) / curvature);
}

/// Tip error of the spatial integrator on the constant-curvature case: no
/// gravity, no actuation, homogeneous section, tip moment bending the rod
/// through `bend_angle`. The exact base loads are integrated directly.
inline double manufactured_tip_error(const ScenarioConfig &cfg, SpatialMethod method, int intervals) {
    ManipulatorModel model = make_model(cfg);
    model.law.kind = constitutive::LawKind::homogeneous;
    model.rpe_mode = RpeMode::off;
    model.self_weight = false;
    model.cap_mass = 0.0;
    const double EI = model.law.E_const * model.section.bending_area_moment();
    const double curvature = cfg.convergence.manufactured_bend_angle / model.length;
    ActuationInput in;
    in.tip_moment = Vec3(EI * curvature, 0.0, 0.0);
    const auto grid = uniform_grid(model.length, static_cast<std::size_t>(intervals) + 1);
    const RodProblem pb = make_problem(model, in, grid, method, static_scheme(), nullptr);
    Vec6 g;
    g << Vec3::Zero(), in.tip_moment;
    const RodState state = integrate_space(pb, base_state(pb, g));
    return (state.tip().p - arc_tip(curvature, model.length)).norm();
}

struct ConvergenceReport {
    OrderFit spatial_euler;
    OrderFit spatial_rk4;
    OrderFit temporal_bdf1;
    OrderFit temporal_bdf_alpha;
    double temporal_alpha = -0.2;
    double frame_dt = 0.0;
};

/// Tip errors at common frame times for each step level of one scheme,
/// against a reference tip path sampled at the same frames.
inline OrderFit temporal_order(const ScenarioConfig &cfg, SchemeChoice scheme, const std::vector<Vec3> &reference,
                               double frame_dt, int frames) {
    std::vector<double> h;
    std::vector<double> e;
    for (int sps : cfg.convergence.temporal_steps_per_second) {
        const double dt = 1.0 / sps;
        ScenarioConfig run = with_method(cfg, cfg.discretization.spatial, scheme, cfg.discretization.nodes, dt);
        const auto rec = detail::run_checked(run, "temporal study");
        h.push_back(dt);
        e.push_back(tip_rmse(sample_tip(rec, dt, frame_dt, frames), reference));
    }
    return fit_order(std::move(h), std::move(e));
}

/// Observed orders: Euler and RK4 in space on the manufactured arc, BDF1 and
/// BDF-alpha in time on the configured program against a Richardson-extrapolated
/// BDF-alpha reference.
inline ConvergenceReport run_convergence_study(const ScenarioConfig &cfg) {
    cfg.validate();
    const auto &cc = cfg.convergence;
    ConvergenceReport rep;
    for (SpatialMethod m : {SpatialMethod::euler, SpatialMethod::rk4}) {
        std::vector<double> h;
        std::vector<double> e;
        for (int n : cc.spatial_intervals) {
            h.push_back(cfg.geometry.l_o / n);
            e.push_back(manufactured_tip_error(cfg, m, n));
        }
        (m == SpatialMethod::euler ? rep.spatial_euler : rep.spatial_rk4) = fit_order(std::move(h), std::move(e));
    }

    const int coarsest = *std::min_element(cc.temporal_steps_per_second.begin(), cc.temporal_steps_per_second.end());
    rep.frame_dt = 1.0 / coarsest;
    const int frames = static_cast<int>(std::llround(cfg.discretization.timeframe * coarsest));
    rep.temporal_alpha = cc.temporal_alpha;
    const SchemeChoice ref_scheme{SchemeKind::bdf_alpha, cc.temporal_alpha};
    const int fine_sps = cc.reference_steps_per_second;
    const auto fine = detail::run_checked(
        with_method(cfg, cfg.discretization.spatial, ref_scheme, cfg.discretization.nodes, 1.0 / fine_sps),
        "temporal reference");
    const auto half = detail::run_checked(
        with_method(cfg, cfg.discretization.spatial, ref_scheme, cfg.discretization.nodes, 2.0 / fine_sps),
        "temporal reference");
    const auto tip_fine = sample_tip(fine, 1.0 / fine_sps, rep.frame_dt, frames);
    const auto tip_half = sample_tip(half, 2.0 / fine_sps, rep.frame_dt, frames);
    std::vector<Vec3> reference(tip_fine.size());
    for (std::size_t k = 0; k < reference.size(); ++k) {
        reference[k] = (4.0 * tip_fine[k] - tip_half[k]) / 3.0;
    }
    rep.temporal_bdf1 = temporal_order(cfg, {SchemeKind::bdf1, 0.0}, reference, rep.frame_dt, frames);
    rep.temporal_bdf_alpha = temporal_order(cfg, ref_scheme, reference, rep.frame_dt, frames);
    return rep;
}

inline json to_json(const OrderFit &f) {
    return {{"step", f.step}, {"error", f.error}, {"slope", f.slope}, {"r_squared", f.r_squared}};
}

inline json to_json(const ConvergenceReport &r) {
    return {{"spatial", {{"euler", to_json(r.spatial_euler)}, {"rk4", to_json(r.spatial_rk4)}}},
            {"temporal",
             {{"bdf1", to_json(r.temporal_bdf1)},
              {"bdf_alpha", to_json(r.temporal_bdf_alpha)},
              {"alpha", r.temporal_alpha},
              {"frame_dt_s", r.frame_dt}}}};
}

inline std::string render_report(const ConvergenceReport &r) {
    std::ostringstream out;
    auto line = [&](const char *name, const OrderFit &f) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "%-22s slope %7.4f   R^2 %.6f   levels %zu\n", name, f.slope, f.r_squared,
                      f.step.size());
        out << buf;
    };
    line("spatial euler", r.spatial_euler);
    line("spatial rk4", r.spatial_rk4);
    line("temporal bdf1", r.temporal_bdf1);
    line("temporal bdf-alpha", r.temporal_bdf_alpha);
    return out.str();
}

// ---------------------------------------------------------------- rpe fit

struct RpeFitReport {
    std::vector<actuator::PressureStretchSample> samples;
    std::vector<double> lambda_r;
    actuator::RpeFit fit;
};

/// Equilibrium stretches of the single-actuator model over the configured
/// pressure range, and the constrained line through them.
inline RpeFitReport run_rpe_fit(const ScenarioConfig &cfg) {
    cfg.validate();
    const auto geom = actuator_geometry(cfg);
    const auto params = hyperelastic_params(cfg);
    RpeFitReport rep;
    for (double p : cfg.rpe_fit.pressures.levels()) {
        const double pa = p * actuator::kPascalPerBar;
        const auto bc = cfg.rpe_fit.boundary == FitBoundary::radial_only ? actuator::BoundaryCondition::radial_only(pa)
                                                                         : actuator::BoundaryCondition::pressurized(pa);
        const auto st = actuator::solve_equilibrium(geom, params, bc);
        rep.samples.push_back({p, st.lambda_z});
        rep.lambda_r.push_back(st.lambda_r);
    }
    rep.fit = actuator::fit_rpe_polynomial(rep.samples);
    return rep;
}

inline json to_json(const RpeFitReport &r) {
    json samples = json::array();
    for (std::size_t k = 0; k < r.samples.size(); ++k) {
        samples.push_back({{"P_bar", r.samples[k].pressure_bar},
                           {"lambda_z", r.samples[k].lambda_z},
                           {"lambda_r", r.lambda_r[k]}});
    }
    return {{"a_per_bar", r.fit.a}, {"intercept", 1.0}, {"r_squared", r.fit.r_squared}, {"samples", samples}};
}

} // namespace softrod::scenario
