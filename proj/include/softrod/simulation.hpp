#pragma once

// Static solves and time marching on top of the shooting solver.

#include <softrod/bdf.hpp>
#include <softrod/dynamics.hpp>
#include <softrod/shooting.hpp>

#include <chrono>
#include <optional>
#include <utility>
#include <vector>

namespace softrod {

/// Base loads of the straight rod under the same tip and distributed loads.
inline Vec6 straight_rod_guess(const RodProblem &pb) {
    const Mat3 R0 = quat_to_rotation(pb.base_orientation);
    const TipTargets tip = tip_boundary_targets(R0, pb);
    const double length = pb.grid.back() - pb.grid.front();
    Vec6 g;
    g << tip.n - pb.distributed_force * length, tip.m;
    return g;
}

struct StaticResult {
    shooting::Solution solution;
    constitutive::SectionState section;
};

inline StaticResult static_solve(const ManipulatorModel &model, const ActuationInput &input,
                                 const std::vector<double> &grid, SpatialMethod method,
                                 const shooting::SolverConfig &cfg, std::optional<Vec6> guess = std::nullopt) {
    RodProblem pb = make_problem(model, input, grid, method, static_scheme(), nullptr);
    const Vec6 g0 = guess ? *guess : straight_rod_guess(pb);
    return {shooting::solve(pb, g0, cfg), pb.section};
}

struct StepResult {
    RodState state;
    Vec6 guess;
    int iterations = 0;
    double wall_ms = 0.0;
    constitutive::SectionState section;
    SchemeKind scheme_used = SchemeKind::bdf1;
};

/// Marches one rod in time. Starts from a converged equilibrium; the first
/// cold_start_steps() steps use BDF1 while the history fills.
class Simulator {
public:
    Simulator(ManipulatorModel model, std::vector<double> grid, SpatialMethod method, BdfScheme scheme,
              shooting::SolverConfig cfg)
        : model_(std::move(model)), grid_(std::move(grid)), method_(method), scheme_(scheme), cfg_(cfg) {
        validate_grid(grid_);
    }

    /// Equilibrium under `input`, used as the state at t0 with zero rates.
    const StaticResult &initialize(const ActuationInput &input) {
        initial_ = static_solve(model_, input, grid_, method_, cfg_);
        history_.emplace(initial_->solution.state);
        last_guess_ = initial_->solution.guess;
        steps_ = 0;
        return *initial_;
    }

    /// Advances one dt with loads evaluated at the new time level.
    StepResult step(const ActuationInput &input) {
        if (!history_) {
            throw InsufficientHistory("initialize() must run before step()");
        }
        const auto start = std::chrono::steady_clock::now();
        const BdfScheme active =
            steps_ < scheme_.cold_start_steps() ? make_scheme(SchemeKind::bdf1, scheme_.dt) : scheme_;
        const HistoryTerms terms = history_->terms(active);
        RodProblem pb = make_problem(model_, input, grid_, method_, active, &terms);
        const Vec6 g0 = cfg_.warm_start ? last_guess_ : straight_rod_guess(pb);
        shooting::Solution sol = shooting::solve(pb, g0, cfg_);
        last_guess_ = sol.guess;
        history_->push(sol.state, active, terms);
        ++steps_;
        StepResult out;
        out.state = std::move(sol.state);
        out.guess = sol.guess;
        out.iterations = sol.iterations;
        out.section = pb.section;
        out.scheme_used = active.kind;
        out.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        return out;
    }

    const HistoryBuffer &history() const { return *history_; }
    const ManipulatorModel &model() const { return model_; }
    const std::vector<double> &grid() const { return grid_; }
    const BdfScheme &scheme() const { return scheme_; }
    int steps_taken() const { return steps_; }

private:
    ManipulatorModel model_;
    std::vector<double> grid_;
    SpatialMethod method_;
    BdfScheme scheme_;
    shooting::SolverConfig cfg_;
    std::optional<StaticResult> initial_;
    std::optional<HistoryBuffer> history_;
    Vec6 last_guess_ = Vec6::Zero();
    int steps_ = 0;
};

} // namespace softrod
