#include "mvldp/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mvldp/errors.hpp"
#include "mvldp/io.hpp"
#include "mvldp/kernels.hpp"
#include "mvldp/rng.hpp"

namespace mvldp {

namespace {

// x + dt·A/(1 + dt‖A‖_{V*}) + dt·Σ f(g - 1)θ; no noise, no compensator.
void deterministic_step(const DiscretizedTriple& triple, double t, ConstVecRef x,
                        const EmpiricalMeasure& mu, std::span<const double> control_row, double dt,
                        VecRef out, StateVector& scratch) {
    drift_A(triple, t, x, mu, out);
    out *= dt / (1.0 + dt * norm(triple, Space::V_star, out));
    out += x;
    if (!control_row.empty()) {
        compensator_drift(triple, t, x, mu, control_row, scratch);
        out += dt * scratch;
    }
}

}  // namespace

Path solve_limit(const DiscretizedTriple& triple, std::size_t K_steps) {
    SolverOptions opts;
    opts.K_steps = K_steps;
    check_step_guard(triple, opts);
    Path path(triple.horizon(), K_steps, triple.dim());
    path.state(0) = triple.initial_state();
    const double dt = path.dt();
    StateVector next(static_cast<Eigen::Index>(triple.dim()));
    StateVector scratch(next.size());
    for (std::size_t k = 0; k < K_steps; ++k) {
        const auto mu = EmpiricalMeasure::dirac(path.state(k));
        deterministic_step(triple, path.time_grid[k], path.state(k), mu, {}, dt, next, scratch);
        check_finite(triple, next, k + 1, 0);
        path.state(k + 1) = next;
    }
    return path;
}

std::vector<std::size_t> align_control(const Control& control, double T, std::size_t K) {
    const double dt = T / static_cast<double>(K);
    if (std::abs(control.horizon() - T) > 1e-9 * T)
        throw ValidationError("control: time cells end at " + format_double(control.horizon()) +
                              ", expected the horizon " + format_double(T));
    std::vector<std::size_t> node(control.time_cells.size());
    for (std::size_t c = 0; c < control.time_cells.size(); ++c) {
        const double pos = control.time_cells[c] / dt;
        const double rounded = std::round(pos);
        if (std::abs(pos - rounded) > 1e-9 * static_cast<double>(K))
            throw ValidationError("control: breakpoint " + format_double(control.time_cells[c]) +
                                  " is not a node of the " + std::to_string(K) + "-step grid");
        node[c] = static_cast<std::size_t>(rounded);
    }
    std::vector<std::size_t> cell_of_step(K);
    for (std::size_t c = 0; c + 1 < node.size(); ++c)
        for (std::size_t k = node[c]; k < node[c + 1]; ++k) cell_of_step[k] = c;
    return cell_of_step;
}

SkeletonSolution solve_skeleton(const DiscretizedTriple& triple, const Control& control,
                                const Path& limit_path) {
    const auto& marks = triple.config().marks;
    control.validate(marks.size());
    const std::size_t K = limit_path.steps();
    if (K == 0 || limit_path.dim() != triple.dim())
        throw ValidationError("solve_skeleton: limit path does not match the model");
    const auto cell_of_step = align_control(control, triple.horizon(), K);

    SkeletonSolution sol;
    sol.control = control;
    sol.q_cost = control_cost_Q(control, marks);
    sol.path = Path(triple.horizon(), K, triple.dim());
    sol.path.state(0) = triple.initial_state();
    sol.limit_flow.time_grid = limit_path.time_grid;
    for (std::size_t k = 0; k <= K; ++k)
        sol.limit_flow.measures.push_back(EmpiricalMeasure::dirac(limit_path.state(k)));

    const double dt = sol.path.dt();
    StateVector next(static_cast<Eigen::Index>(triple.dim()));
    StateVector scratch(next.size());
    for (std::size_t k = 0; k < K; ++k) {
        deterministic_step(triple, sol.path.time_grid[k], sol.path.state(k), sol.limit_flow.measures[k],
                           control.row(cell_of_step[k]), dt, next, scratch);
        check_finite(triple, next, k + 1, 0);
        sol.path.state(k + 1) = next;
    }
    return sol;
}

namespace {

// Controlled replicas [first, first + count); replica r always uses stream r.
std::vector<Path> controlled_paths(const DiscretizedTriple& triple, double eps, const Control& control,
                                   const MeasureFlow& law_flow, std::size_t first, std::size_t count,
                                   std::uint64_t seed, const SolverOptions& opts) {
    if (!(eps > 0.0)) throw ValidationError("noise.eps: must be positive");
    if (count == 0) throw ValidationError("solve_controlled: need at least one replica");
    check_step_guard(triple, opts);
    const auto& marks = triple.config().marks;
    control.validate(marks.size());
    const std::size_t K = opts.K_steps;
    law_flow.validate();
    if (law_flow.size() != K + 1)
        throw ValidationError("solve_controlled: law flow has " + std::to_string(law_flow.size()) +
                              " nodes, solver grid has " + std::to_string(K + 1));
    const auto cell_of_step = align_control(control, triple.horizon(), K);
    const double dt = triple.horizon() / static_cast<double>(K);

    std::vector<StepJumps> jumps(count);
    for (std::size_t i = 0; i < count; ++i) {
        const auto stream = sample_prm(marks, control, 1.0 / eps,
                                       derive_seed(seed, first + i, StreamSalt::controlled));
        jumps[i] = StepJumps::bucket(stream, dt, K);
    }
    std::vector<Path> paths(count, Path(triple.horizon(), K, triple.dim()));
    for (auto& p : paths) p.state(0) = triple.initial_state();
    const FrozenSegment seg{triple, law_flow, eps, dt, 0, K, !opts.unsafe_explicit, &control,
                            cell_of_step};
    advance_replicas(opts.policy, seg, jumps, paths);
    return paths;
}

}  // namespace

std::vector<Path> solve_controlled_ensemble(const DiscretizedTriple& triple, double eps,
                                            const Control& control, const MeasureFlow& law_flow,
                                            std::size_t replicas, std::uint64_t seed,
                                            const SolverOptions& opts) {
    return controlled_paths(triple, eps, control, law_flow, 0, replicas, seed, opts);
}

Path solve_controlled(const DiscretizedTriple& triple, double eps, const Control& control,
                      const MeasureFlow& law_flow, std::uint64_t seed, const SolverOptions& opts,
                      std::size_t replica) {
    auto paths = controlled_paths(triple, eps, control, law_flow, replica, 1, seed, opts);
    return std::move(paths.front());
}

double skeleton_energy_bound(const DiscretizedTriple& triple, const Path& limit_path, double N) {
    const double T = triple.horizon();
    const double l2 = triple.envelope_l2();
    const double c = std::max(triple.constants().combined_c(), 0.0);
    const double dev = deviation_bound(1.0, N, triple.config().marks.total_mass() * T);
    double s0 = 0.0;
    for (std::size_t k = 0; k <= limit_path.steps(); ++k)
        s0 = std::max(s0, std::pow(norm(triple, Space::H, limit_path.state(k)), 2));
    const double x2 = std::pow(norm(triple, Space::H, triple.initial_state()), 2);
    return 3.0 * (x2 + (c * T + l2 * dev) * (s0 + 1.0)) * std::exp(c * T + 4.0 * l2 * dev);
}

double sup_distance(const DiscretizedTriple& triple, const Path& a, const Path& b) {
    if (a.steps() != b.steps() || a.dim() != b.dim())
        throw ValidationError("sup_distance: paths live on different grids");
    double best = 0.0;
    for (std::size_t k = 0; k <= a.steps(); ++k)
        best = std::max(best, norm(triple, Space::H, StateVector(a.state(k) - b.state(k))));
    return best;
}

}  // namespace mvldp
