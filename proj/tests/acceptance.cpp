// Acceptance runner: one PASS/FAIL line per criterion, tolerances pinned below.
// Optional argument: directory for the benchmark and convergence reports.

#include <softrod/scenario.hpp>
#include <softrod/study.hpp>

#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

using namespace softrod;
using namespace softrod::scenario;

namespace {

constexpr double kCoefficientTol = 1e-14;     // 1: BDF-alpha(0) vs BDF2
constexpr double kRmseAgreement = 0.05;       // 4: RK4 N=50 vs N=200
constexpr double kEulerSlope = 1.0, kEulerSlopeTol = 0.3;
constexpr double kRk4Slope = 4.0, kRk4SlopeTol = 0.5;
constexpr double kBdf1Slope = 1.0, kBdf1SlopeTol = 0.3;
constexpr double kBdfAlphaSlope = 2.0, kBdfAlphaSlopeTol = 0.4;
constexpr double kMinRSquared = 0.99;
constexpr double kSymmetryTol = 1e-9;         // 6: m
constexpr double kEqualModuliTol = 1e-12;     // 6: relative
constexpr double kOracleResidualTol = 1e-6;   // 7: normalized
constexpr double kZeroPressureTol = 1e-10;    // 7
constexpr double kMinFitRSquared = 0.99;      // 7
constexpr int kOracleSamplesPerLayer = 20000; // 7
constexpr double kVariantSeparation = 1e-4;   // 8: m
constexpr double kVariantCollapse = 1e-6;     // 8: m
constexpr double kSolverAgreement = 1e-6;     // 9: m
constexpr double kSettleTol = 1e-6;           // 9: m
constexpr double kSettleTime = 3.0;           // 9: s
constexpr double kQuatDriftTol = 1e-9;        // 10
constexpr double kRodriguesTol = 1e-10;       // 10
constexpr double kMatrixOdeTol = 1e-8;        // 10

constexpr double kBudget[10] = {1.0, 120.0, 120.0, 300.0, 300.0, 30.0, 60.0, 30.0, 120.0, 10.0};

struct Outcome {
    bool pass = true;
    std::string detail;
    std::vector<std::string> notes;

    void check(bool ok, const std::string &what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
};

std::string fmt(const char *f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string fmt(const char *f, double a, double b) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

std::filesystem::path g_out = "acceptance_out";

// ---------------------------------------------------------------- 1

Outcome table_coefficients() {
    Outcome o;
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> step(1e-3, 0.5);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int k = 0; k < 200; ++k) {
        const double dt = step(rng);
        const auto b1 = make_scheme(SchemeKind::bdf1, dt);
        const auto b2 = make_scheme(SchemeKind::bdf2, dt);
        const auto b3 = make_scheme(SchemeKind::bdf3, dt);
        const double a = -0.5 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        const auto ba = make_scheme(SchemeKind::bdf_alpha, dt, a);
        o.check(b1.c0 == 1.0 / dt && b1.c[0] == -1.0 / dt, "BDF1 coefficients");
        o.check(b2.c0 == 3.0 / (2.0 * dt) && b2.c[0] == -2.0 / dt && b2.c[1] == 1.0 / (2.0 * dt), "BDF2 coefficients");
        o.check(b3.c0 == 11.0 / (6.0 * dt) && b3.c[0] == -3.0 / dt && b3.c[1] == 3.0 / (2.0 * dt) &&
                    b3.c[2] == -1.0 / (3.0 * dt),
                "BDF3 coefficients");
        o.check(ba.c0 == (1.5 + a) / (dt * (1.0 + a)) && ba.c[0] == -2.0 / dt &&
                    ba.c[1] == (0.5 + a) / (dt * (1.0 + a)) && ba.d1 == a / (1.0 + a),
                "BDF-alpha coefficients");

        const auto alpha0 = make_scheme(SchemeKind::bdf_alpha, dt, 0.0);
        const std::vector<double> past{n(rng), n(rng)};
        const double rate = n(rng);
        const double now = n(rng);
        const double x = bdf_time_derivative(alpha0, now, past, &rate);
        const double y = bdf_time_derivative(b2, now, past, &rate);
        o.check(std::abs(x - y) <= kCoefficientTol * std::max(1.0, std::abs(y)), "BDF-alpha(0) differs from BDF2");
    }
    o.detail = o.pass ? "closed forms exact, alpha = 0 reproduces BDF2" : o.detail;
    return o;
}

// ---------------------------------------------------------------- 2-4

BenchmarkTable g_table;
bool g_table_ready = false;

const BenchmarkTable &benchmark() {
    if (!g_table_ready) {
        ScenarioConfig cfg;
        cfg.benchmark.use_cache = false;
        g_table = benchmark_methods(cfg, g_out);
        write_text(g_out / "benchmark.txt", render_table(g_table, cfg.benchmark.grid_sizes, cfg.benchmark));
        write_text(g_out / "benchmark.json", to_json(g_table).dump(2) + "\n");
        g_table_ready = true;
    }
    return g_table;
}

bool expect_unstable(const SchemeChoice &s) {
    return s.kind == SchemeKind::trapezoidal || s.kind == SchemeKind::bdf3;
}

Outcome stability() {
    Outcome o;
    const auto &t = benchmark();
    int flagged = 0, completed = 0;
    for (const auto &c : t.cells) {
        const std::string name = to_string(c.spatial) + "/" + std::to_string(c.nodes) + " " + c.scheme.label();
        if (expect_unstable(c.scheme)) {
            const bool ok = c.status == RunStatus::blowup;
            flagged += ok;
            o.check(ok, name + " not flagged unstable");
        } else {
            const bool ok = c.status == RunStatus::completed;
            completed += ok;
            o.check(ok, name + " did not complete");
        }
    }
    o.notes.push_back(std::to_string(flagged) + "/8 trapezoidal/BDF3 cells flagged, " + std::to_string(completed) +
                      "/20 BDF1/BDF2/BDF-alpha cells completed 30 steps");
    if (o.pass) o.detail = "unstable cells flagged, stable cells complete";
    return o;
}

Outcome runtime_ordering() {
    Outcome o;
    const auto &t = benchmark();
    for (const auto &s : benchmark_schemes(BenchmarkConfig{})) {
        if (expect_unstable(s)) continue;
        const auto *e50 = &t.cell(SpatialMethod::euler, s.kind, s.alpha, 50);
        const auto *e200 = &t.cell(SpatialMethod::euler, s.kind, s.alpha, 200);
        const auto *r50 = &t.cell(SpatialMethod::rk4, s.kind, s.alpha, 50);
        const auto *r200 = &t.cell(SpatialMethod::rk4, s.kind, s.alpha, 200);
        if (!e50->stable() || !e200->stable() || !r50->stable() || !r200->stable()) continue;
        char buf[160];
        std::snprintf(buf, sizeof buf, "%-15s euler %.4f / %.4f s   rk4 %.4f / %.4f s", s.label().c_str(),
                      e50->runtime_s, e200->runtime_s, r50->runtime_s, r200->runtime_s);
        o.notes.push_back(buf);
        o.check(e50->runtime_s < e200->runtime_s, s.label() + ": euler/50 >= euler/200");
        o.check(e200->runtime_s < r50->runtime_s, s.label() + ": euler/200 >= rk4/50");
        o.check(r50->runtime_s < r200->runtime_s, s.label() + ": rk4/50 >= rk4/200");
    }
    if (o.pass) o.detail = "euler/50 < euler/200 < rk4/50 < rk4/200 on every stable scheme";
    return o;
}

Outcome accuracy_pattern() {
    Outcome o;
    const auto &t = benchmark();
    o.notes.push_back(fmt("reference Richardson error estimate %.3e m", t.reference.richardson_error));
    for (const auto &s : benchmark_schemes(BenchmarkConfig{})) {
        const auto *e50 = &t.cell(SpatialMethod::euler, s.kind, s.alpha, 50);
        const auto *e200 = &t.cell(SpatialMethod::euler, s.kind, s.alpha, 200);
        const auto *r50 = &t.cell(SpatialMethod::rk4, s.kind, s.alpha, 50);
        const auto *r200 = &t.cell(SpatialMethod::rk4, s.kind, s.alpha, 200);
        if (!e50->stable() || !e200->stable() || !r50->stable() || !r200->stable()) continue;
        const double rel = std::abs(r50->rmse - r200->rmse) / std::max(r50->rmse, r200->rmse);
        char buf[160];
        std::snprintf(buf, sizeof buf, "%-15s euler %.4f / %.4f mm   rk4 %.4f / %.4f mm (%.2f%%)",
                      s.label().c_str(), 1e3 * e50->rmse, 1e3 * e200->rmse, 1e3 * r50->rmse, 1e3 * r200->rmse,
                      100.0 * rel);
        o.notes.push_back(buf);
        o.check(rel <= kRmseAgreement, s.label() + ": rk4 RMSE differs by " + fmt("%.3f", rel));
        o.check(e200->rmse < e50->rmse, s.label() + ": euler RMSE does not improve with N");
    }
    if (o.pass) o.detail = "rk4 RMSE grid-independent within 5%, euler improves with N";
    return o;
}

// ---------------------------------------------------------------- 5

Outcome convergence_orders() {
    Outcome o;
    const ScenarioConfig cfg;
    const ConvergenceReport rep = run_convergence_study(cfg);
    write_text(g_out / "convergence.txt", render_report(rep));
    write_text(g_out / "convergence.json", to_json(rep).dump(2) + "\n");
    auto judge = [&](const char *name, const OrderFit &f, double target, double tol) {
        std::string errs;
        for (double e : f.error) errs += fmt(" %.3e", e);
        o.notes.push_back(std::string(name) + fmt(": slope %.4f, R^2 %.6f, errors", f.slope, f.r_squared) + errs);
        o.check(std::abs(f.slope - target) <= tol, std::string(name) + fmt(" slope %.3f", f.slope));
        o.check(f.step.size() >= 4 && f.r_squared > kMinRSquared, std::string(name) + fmt(" R^2 %.4f", f.r_squared));
    };
    judge("spatial euler", rep.spatial_euler, kEulerSlope, kEulerSlopeTol);
    judge("spatial rk4", rep.spatial_rk4, kRk4Slope, kRk4SlopeTol);
    judge("temporal bdf1", rep.temporal_bdf1, kBdf1Slope, kBdf1SlopeTol);
    judge("temporal bdf-alpha", rep.temporal_bdf_alpha, kBdfAlphaSlope, kBdfAlphaSlopeTol);
    if (o.pass) o.detail = "observed orders within tolerance";
    return o;
}

// ---------------------------------------------------------------- 6

Outcome symmetry() {
    Outcome o;
    ScenarioConfig cfg;
    cfg.sweep.cases = {DriveCase::all, DriveCase::a};
    const SweepRecord rec = run_static_sweep(cfg);
    const ManipulatorModel model = make_model(cfg);
    double worst_axis = 0.0, worst_plane = 0.0, worst_shift = 0.0;
    for (const auto &l : rec.levels) {
        o.check(l.converged, "level failed: " + l.error);
        if (!l.converged) continue;
        if (l.drive_case == DriveCase::all) {
            worst_axis = std::max({worst_axis, std::abs(l.frame.tip().x()), std::abs(l.frame.tip().y())});
            const auto section = constitutive::build_section(model.section, model.law, l.frame.pressures);
            worst_shift = std::max(worst_shift, section.D_Na.norm());
        } else {
            for (const auto &p : l.frame.points) worst_plane = std::max(worst_plane, std::abs(p.y()));
        }
    }
    o.check(worst_axis < kSymmetryTol, fmt("equal pressurization TCP off axis by %.3e m", worst_axis));
    o.check(worst_shift == 0.0, fmt("neutral axis shift %.3e m", worst_shift));
    o.check(worst_plane < kSymmetryTol, fmt("case a leaves its plane by %.3e m", worst_plane));

    const auto geom = model.section;
    const auto [kse, kbt] = constitutive::stiffness_homogeneous(geom, model.law);
    const double E = model.law.E_const;
    const auto s = constitutive::stiffness_inhomogeneous(geom, {E, E, E}, model.law.gamma);
    const double rel = std::max((s.K_se - kse).cwiseAbs().maxCoeff() / kse.cwiseAbs().maxCoeff(),
                                (s.K_bt - kbt).cwiseAbs().maxCoeff() / kbt.cwiseAbs().maxCoeff());
    o.check(rel < kEqualModuliTol, fmt("equal-moduli stiffness differs by %.3e", rel));
    o.notes.push_back(fmt("TCP off axis %.2e m, case a off plane %.2e m", worst_axis, worst_plane) +
                      fmt(", equal-moduli stiffness rel. diff %.2e", rel));
    if (o.pass) o.detail = "symmetric loads give symmetric solutions";
    return o;
}

// ---------------------------------------------------------------- 7

Outcome rpe_model() {
    Outcome o;
    const ScenarioConfig cfg;
    const auto g = actuator_geometry(cfg);
    const auto p = hyperelastic_params(cfg);
    const oracle::Tube tube{g.R_i, g.R_m, g.R_o, g.psi, p.mu, p.c1, p.c2, p.E_fiber};
    double worst = 0.0;
    double last = 1.0;
    bool monotone = true;
    for (double bar : cfg.rpe_fit.pressures.levels()) {
        for (auto kind : {actuator::BoundaryCondition::Kind::radial_only,
                          actuator::BoundaryCondition::Kind::pressurized}) {
            const actuator::BoundaryCondition bc{kind, bar * actuator::kPascalPerBar, 0.0};
            const auto st = actuator::solve_equilibrium(g, p, bc);
            const auto target = actuator::equilibrium_targets(g, st, bc);
            const auto [drop, axial] =
                tube.loads(st.lambda_z, st.lambda_r, target.internal_pressure, kOracleSamplesPerLayer);
            worst = std::max({worst, std::abs(drop - target.drop) / p.mu,
                              std::abs(axial - target.axial) / (p.mu * g.R_i * g.R_i)});
            if (kind == actuator::BoundaryCondition::Kind::radial_only) {
                monotone = monotone && st.lambda_z > last;
                last = st.lambda_z;
            }
        }
    }
    o.check(worst < kOracleResidualTol, fmt("oracle residual %.3e", worst));
    o.check(monotone, "lambda_z not increasing in P");
    const auto zero = actuator::solve_equilibrium(g, p, actuator::BoundaryCondition::radial_only(0.0));
    const double off = std::max(std::abs(zero.lambda_z - 1.0), std::abs(zero.lambda_r - 1.0));
    o.check(off < kZeroPressureTol, fmt("P = 0 gives stretch off by %.3e", off));
    const RpeFitReport fit = run_rpe_fit(cfg);
    o.check(fit.fit.a > 0.0, "non-positive slope");
    o.check(fit.fit.r_squared > kMinFitRSquared, fmt("fit R^2 %.5f", fit.fit.r_squared));
    o.notes.push_back(fmt("max oracle residual %.2e, fit a = %.6f per bar", worst, fit.fit.a) +
                      fmt(", R^2 = %.6f", fit.fit.r_squared));
    if (o.pass) o.detail = "equilibria verified by oracle, fit meets quality bar";
    return o;
}

// ---------------------------------------------------------------- 8

struct Variant {
    const char *name;
    constitutive::LawKind law;
    RpeMode rpe;
};

constexpr Variant kVariants[3] = {{"homogeneous/no-RPE", constitutive::LawKind::homogeneous, RpeMode::off},
                                  {"homogeneous/RPE", constitutive::LawKind::homogeneous, RpeMode::equivalent_force},
                                  {"inhomogeneous/RPE", constitutive::LawKind::inhomogeneous,
                                   RpeMode::equivalent_force}};

Vec3 variant_tip(ScenarioConfig cfg, const Variant &v) {
    cfg.material.law = v.law;
    cfg.rpe.mode = v.rpe;
    const ManipulatorModel model = make_model(cfg);
    const auto grid = uniform_grid(model.length, static_cast<std::size_t>(cfg.discretization.nodes));
    const ActuationInput in = static_input(DriveCase::a, 0.65);
    const auto res = static_solve(model, in, grid, cfg.discretization.spatial, cfg.solver);
    return make_frame(0.0, res.solution.state, res.section, in.pressures_bar, 0, 0.0).tip();
}

Outcome model_difference() {
    Outcome o;
    ScenarioConfig cfg;
    const double Am = constitutive::CrossSectionGeometry{cfg.geometry.b, cfg.geometry.R_i, cfg.geometry.R_o}.wall_area();
    const Vec3 rest(0.0, 0.0, cfg.geometry.l_o);

    ScenarioConfig defaults = cfg;
    std::string info = "default a1:";
    for (const auto &v : kVariants) info += fmt(" %.5f", (variant_tip(defaults, v) - rest).norm());
    o.notes.push_back(info + " m");

    // inhomogeneous law anchored to the homogeneous modulus at zero load
    cfg.material.a1 = 1.0 / (Am * cfg.material.E);
    double disp[3];
    Vec3 tips[3];
    for (int k = 0; k < 3; ++k) {
        tips[k] = variant_tip(cfg, kVariants[k]);
        disp[k] = (tips[k] - rest).norm();
    }
    o.notes.push_back(fmt("matched a1: displacements %.5f, %.5f", disp[0], disp[1]) + fmt(", %.5f m", disp[2]));
    for (int i = 0; i < 3; ++i) {
        for (int j = i + 1; j < 3; ++j) {
            const double d = (tips[i] - tips[j]).norm();
            o.check(d > kVariantSeparation, std::string(kVariants[i].name) + " vs " + kVariants[j].name +
                                                fmt(" differ by %.3e m", d));
        }
    }
    o.check(disp[0] < disp[1] && disp[1] < disp[2], "displacements not ordered no-RPE < RPE < inhomogeneous/RPE");

    ScenarioConfig limit = cfg;
    limit.rpe.a = 0.0;
    limit.material.a2 = 0.0;
    double worst = 0.0;
    Vec3 lt[3];
    for (int k = 0; k < 3; ++k) lt[k] = variant_tip(limit, kVariants[k]);
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) worst = std::max(worst, (lt[i] - lt[j]).norm());
    o.check(worst < kVariantCollapse, fmt("variants differ by %.3e m at a = a2 = 0", worst));
    o.notes.push_back(fmt("a = a2 = 0: max pairwise difference %.2e m", worst));
    if (o.pass) o.detail = "variants separated and ordered, collapse in the limit";
    return o;
}

// ---------------------------------------------------------------- 9

Outcome solver_robustness() {
    Outcome o;
    ScenarioConfig cfg;
    const ManipulatorModel model = make_model(cfg);
    const auto grid = uniform_grid(model.length, static_cast<std::size_t>(cfg.discretization.nodes));
    shooting::SolverConfig lm = cfg.solver;
    lm.method = shooting::Method::lm;
    shooting::SolverConfig dl = cfg.solver;
    dl.method = shooting::Method::dogleg;
    double worst_methods = 0.0;
    double worst_guess = 0.0;
    std::mt19937 rng(2024);
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> radius(0.0, 1.0);
    int solves = 0;
    for (DriveCase c : {DriveCase::a, DriveCase::b, DriveCase::all}) {
        for (double bar : cfg.sweep.pressures.levels()) {
            const ActuationInput in = static_input(c, bar);
            const Vec3 a = static_solve(model, in, grid, cfg.discretization.spatial, lm).solution.state.tip().p;
            const Vec3 b = static_solve(model, in, grid, cfg.discretization.spatial, dl).solution.state.tip().p;
            worst_methods = std::max(worst_methods, (a - b).norm());
            for (int k = 0; k < 3; ++k) {
                Vec6 g;
                for (int j = 0; j < 6; ++j) g[j] = n(rng);
                g *= radius(rng) / g.norm();
                const Vec3 t = static_solve(model, in, grid, cfg.discretization.spatial, lm, g).solution.state.tip().p;
                worst_guess = std::max(worst_guess, (t - a).norm());
                ++solves;
            }
        }
    }
    o.check(worst_methods < kSolverAgreement, fmt("lm vs dogleg differ by %.3e m", worst_methods));
    o.check(worst_guess < kSolverAgreement, fmt("guess dependence %.3e m", worst_guess));

    double worst_settle = 0.0;
    for (DriveCase c : {DriveCase::a, DriveCase::b}) {
        ScenarioConfig run = cfg;
        run.actuation.drive_case = c;
        run.actuation.drive = Signal::constant(0.4);
        run.actuation.initial = InitialState::rest;
        run.discretization.scheme = SchemeKind::bdf1;
        run.discretization.timeframe = kSettleTime;
        const TrajectoryRecord rec = run_dynamic(run);
        o.check(rec.stable(), "settling run failed: " + rec.message);
        if (!rec.stable()) continue;
        ScenarioConfig sweep = cfg;
        sweep.sweep.cases = {c};
        sweep.sweep.pressures = {0.4, 0.4, 0.05};
        const SweepRecord st = run_static_sweep(sweep);
        worst_settle = std::max(worst_settle, (rec.frames.back().tip() - st.levels.at(0).frame.tip()).norm());
    }
    o.check(worst_settle < kSettleTol, fmt("dynamic run settles %.3e m from static", worst_settle));
    o.notes.push_back(fmt("lm vs dogleg %.2e m, guess dependence %.2e m", worst_methods, worst_guess) +
                      fmt(" over %.0f guesses, settle gap %.2e m", solves, worst_settle));
    if (o.pass) o.detail = "solutions independent of method and guess, dynamics settle to statics";
    return o;
}

// ---------------------------------------------------------------- 10

Outcome kinematics() {
    Outcome o;
    std::mt19937 rng(10);
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> angle(-3.14, 3.14);
    double worst_rod = 0.0;
    bool exact = true;
    for (int k = 0; k < 2000; ++k) {
        const Vec3 axis(n(rng), n(rng), n(rng));
        const double a = angle(rng);
        worst_rod = std::max(worst_rod, (quat_to_rotation(oracle::axis_angle_quaternion(axis, a)) -
                                         oracle::rodrigues(axis, a)).cwiseAbs().maxCoeff());
        const Vec3 w = 100.0 * axis;
        exact = exact && vee(hat(w)) == w;
    }
    o.check(worst_rod < kRodriguesTol, fmt("rodrigues mismatch %.3e", worst_rod));
    o.check(exact, "hat/vee round trip not exact");

    // quaternion ODE without renormalization against the matrix ODE
    const double length = 0.8;
    const int steps = 4000;
    Quaternion h = identity_quaternion();
    const double ds = length / steps;
    for (int k = 0; k < steps; ++k) {
        const double s = k * ds;
        auto f = [](const Quaternion &q, double t) { return quat_rate_from_curvature(q, oracle::curvature_profile(t)); };
        const Quaternion k1 = f(h, s);
        const Quaternion k2 = f(h + 0.5 * ds * k1, s + 0.5 * ds);
        const Quaternion k3 = f(h + 0.5 * ds * k2, s + 0.5 * ds);
        const Quaternion k4 = f(h + ds * k3, s + ds);
        h += ds / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    const double ode = (quat_to_rotation(h) - oracle::integrate_rotation(length, steps)).cwiseAbs().maxCoeff();
    o.check(ode < kMatrixOdeTol, fmt("rotation reconstruction off by %.3e", ode));
    const double raw_drift = std::abs(h.norm() - 1.0);

    // every node of every step of a default dynamic run
    ScenarioConfig cfg;
    const ManipulatorModel model = make_model(cfg);
    const auto &d = cfg.discretization;
    Simulator sim(model, uniform_grid(model.length, static_cast<std::size_t>(d.nodes)), d.spatial,
                  make_scheme(d.scheme, d.dt, d.alpha), cfg.solver);
    double run_drift = 0.0;
    auto scan = [&](const RodState &s) {
        for (const auto &node : s.nodes) run_drift = std::max(run_drift, std::abs(node.h.norm() - 1.0));
    };
    scan(sim.initialize(input_at(cfg.actuation, 0.0)).solution.state);
    for (int k = 1; k <= d.steps(); ++k) scan(sim.step(input_at(cfg.actuation, k * d.dt)).state);
    o.check(std::max(raw_drift, run_drift) < kQuatDriftTol,
            fmt("quaternion drift %.3e", std::max(raw_drift, run_drift)));
    o.notes.push_back(fmt("rodrigues %.2e, matrix ODE %.2e", worst_rod, ode) +
                      fmt(", drift unnormalized %.2e / dynamic run %.2e", raw_drift, run_drift));
    if (o.pass) o.detail = "kinematic identities hold";
    return o;
}

} // namespace

int main(int argc, char **argv) {
    if (argc > 1) g_out = argv[1];
    std::filesystem::create_directories(g_out);
    const std::pair<const char *, std::function<Outcome()>> criteria[] = {
        {"BDF coefficient table", table_coefficients},
        {"stability of time schemes", stability},
        {"runtime ordering", runtime_ordering},
        {"accuracy pattern", accuracy_pattern},
        {"convergence orders", convergence_orders},
        {"symmetry", symmetry},
        {"RPE continuum model", rpe_model},
        {"model differences", model_difference},
        {"solver robustness", solver_robustness},
        {"kinematics", kinematics},
    };
    int failures = 0;
    std::vector<std::string> report;
    for (int k = 0; k < 10; ++k) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception &e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        // criteria 3 and 4 share the benchmark run charged to criterion 2
        if (k == 1 && g_table_ready) seconds = std::max(seconds, g_table.reference.runtime_s);
        if (seconds > kBudget[k]) o.check(false, fmt("took %.1f s", seconds) + fmt(" > %.0f s budget", kBudget[k]));
        failures += !o.pass;
        std::printf("%s %2d %-28s %7.2f s  %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first, seconds,
                    o.detail.c_str());
        for (const auto &note : o.notes) std::printf("        %s\n", note.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of 10 criteria passed\n", 10 - failures);
    return failures == 0 ? 0 : 1;
}
