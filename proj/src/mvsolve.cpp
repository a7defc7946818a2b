#include "mvldp/mvsolve.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mvldp/errors.hpp"
#include "mvldp/io.hpp"
#include "mvldp/prm.hpp"
#include "mvldp/rng.hpp"

namespace mvldp {

void check_step_guard(const DiscretizedTriple& triple, const SolverOptions& opts) {
    if (opts.K_steps == 0) throw ValidationError("discretization.K_steps: must be at least 1");
    if (opts.unsafe_explicit || !is_pde(triple.kind())) return;
    const double dt = triple.horizon() / static_cast<double>(opts.K_steps);
    double limit = std::pow(triple.mesh(), triple.alpha());
    if (triple.c_mono() != 0.0) limit = std::min(limit, 0.1 / std::abs(triple.c_mono()));
    if (dt > limit * (1.0 + 1e-12)) {
        const auto needed = static_cast<std::size_t>(std::ceil(triple.horizon() / limit));
        throw ValidationError("discretization.K_steps: dt = " + format_double(dt) +
                              " exceeds the step guard " + format_double(limit) +
                              "; use K_steps >= " + std::to_string(needed));
    }
}

double default_window(const DiscretizedTriple& triple) {
    return std::min(triple.horizon(), 0.9 / (2.0 * std::max(triple.c_mono(), 1e-6)));
}

StateVector euler_step_frozen(const DiscretizedTriple& triple, double t, ConstVecRef x,
                              const EmpiricalMeasure& mu_t,
                              std::span<const std::size_t> jump_marks, double eps, double dt) {
    if (!(dt > 0.0)) throw ValidationError("euler_step_frozen: dt must be positive");
    StateVector out(x.size());
    euler_step(triple, t, x, mu_t, jump_marks, {}, eps, dt, true, out);
    check_finite(triple, out, 1, 0);
    return out;
}

JumpStream replica_stream(const DiscretizedTriple& triple, double eps, std::uint64_t seed,
                          std::size_t replica, StreamSalt salt) {
    if (!(eps > 0.0)) throw ValidationError("noise.eps: must be positive");
    const auto& marks = triple.config().marks;
    const Control unit = Control::constant(triple.horizon(), 1, marks.size(), 1.0);
    return sample_prm(marks, unit, 1.0 / eps, derive_seed(seed, replica, salt));
}

namespace {

std::vector<StepJumps> bucket_streams(const DiscretizedTriple& triple, double eps, std::size_t count,
                                      std::uint64_t seed, std::size_t K, StreamSalt salt) {
    const double dt = triple.horizon() / static_cast<double>(K);
    std::vector<StepJumps> out(count);
    for (std::size_t i = 0; i < count; ++i)
        out[i] = StepJumps::bucket(replica_stream(triple, eps, seed, i, salt), dt, K);
    return out;
}

std::vector<Path> fresh_paths(const DiscretizedTriple& triple, std::size_t count, std::size_t K) {
    std::vector<Path> paths(count, Path(triple.horizon(), K, triple.dim()));
    for (auto& p : paths) p.state(0) = triple.initial_state();
    return paths;
}

void check_flow(const MeasureFlow& flow, std::size_t K, std::size_t dim) {
    flow.validate();
    if (flow.size() != K + 1)
        throw ValidationError("law flow has " + std::to_string(flow.size()) +
                              " nodes, solver grid has " + std::to_string(K + 1));
    for (const auto& m : flow.measures)
        if (m.dim() != dim) throw ValidationError("law flow dimension does not match the model");
}

}  // namespace

Path solve_frozen(const DiscretizedTriple& triple, const MeasureFlow& law_flow, double eps,
                  std::uint64_t seed, const SolverOptions& opts, std::size_t replica) {
    check_step_guard(triple, opts);
    const std::size_t K = opts.K_steps;
    check_flow(law_flow, K, triple.dim());
    const double dt = triple.horizon() / static_cast<double>(K);
    std::vector<StepJumps> jumps{StepJumps::bucket(replica_stream(triple, eps, seed, replica), dt, K)};
    std::vector<Path> paths = fresh_paths(triple, 1, K);
    const FrozenSegment seg{triple, law_flow, eps, dt, 0, K, !opts.unsafe_explicit};
    advance_replicas_serial(seg, jumps, paths);
    return std::move(paths.front());
}

PicardResult picard_law_flow(const DiscretizedTriple& triple, double eps, std::size_t replicas,
                             double tol, std::uint64_t seed, const SolverOptions& opts) {
    check_step_guard(triple, opts);
    if (replicas == 0) throw ValidationError("discretization.replicas: must be at least 1");
    if (!(tol > 0.0)) throw ValidationError("discretization.picard_tol: must be positive");
    if (opts.max_outer == 0) throw ValidationError("discretization.max_outer: must be at least 1");
    const std::size_t K = opts.K_steps;
    const double T = triple.horizon();
    const double dt = T / static_cast<double>(K);
    const double t0 = opts.window > 0.0 ? std::min(opts.window, T) : default_window(triple);
    const auto window_steps =
        std::clamp<std::size_t>(static_cast<std::size_t>(std::floor(t0 / dt + 1e-9)), 1, K);

    // common random numbers: one stream per replica, reused by every iterate
    const auto jumps = bucket_streams(triple, eps, replicas, seed, K, StreamSalt::replica);
    PicardResult result;
    result.paths = fresh_paths(triple, replicas, K);
    result.flow = MeasureFlow::constant(uniform_grid(T, K), EmpiricalMeasure::dirac(triple.initial_state()));

    for (std::size_t k0 = 0; k0 < K;) {
        const std::size_t k1 = std::min(K, k0 + window_steps);
        for (std::size_t k = k0 + 1; k <= k1; ++k) result.flow.measures[k] = result.flow.measures[k0];
        result.window_nodes.push_back(k0);
        auto& history = result.residual_history.emplace_back();
        bool converged = false;
        for (std::size_t it = 0; it < opts.max_outer; ++it) {
            const FrozenSegment seg{triple, result.flow, eps, dt, k0, k1, !opts.unsafe_explicit};
            advance_replicas(opts.policy, seg, jumps, result.paths);
            double residual = 0.0;
            for (std::size_t k = k0 + 1; k <= k1; ++k) {
                EmpiricalMeasure next = empirical_law(result.paths, k);
                residual = std::max(residual, wasserstein2(triple, next, result.flow.measures[k]));
                result.flow.measures[k] = std::move(next);
            }
            history.push_back(residual);
            if (residual < tol) {
                converged = true;
                break;
            }
        }
        if (!converged) {
            throw NonConvergenceError("Picard iteration did not reach tol " + format_double(tol) +
                                          " within " + std::to_string(opts.max_outer) +
                                          " iterations on the window starting at t = " +
                                          format_double(result.flow.time_grid[k0]),
                                      result.residual_history);
        }
        k0 = k1;
    }
    return result;
}

Ensemble solve_mckean_vlasov(const DiscretizedTriple& triple, double eps, std::size_t replicas,
                             double tol, std::uint64_t seed, const SolverOptions& opts) {
    PicardResult picard = picard_law_flow(triple, eps, replicas, tol, seed, opts);
    const std::size_t K = opts.K_steps;
    const double dt = triple.horizon() / static_cast<double>(K);
    const auto jumps = bucket_streams(triple, eps, replicas, seed, K, StreamSalt::replica);

    Ensemble ens;
    ens.eps = eps;
    ens.paths = fresh_paths(triple, replicas, K);
    const FrozenSegment seg{triple, picard.flow, eps, dt, 0, K, !opts.unsafe_explicit};
    advance_replicas(opts.policy, seg, jumps, ens.paths);
    ens.law_flow.time_grid = picard.flow.time_grid;
    for (std::size_t k = 0; k <= K; ++k) ens.law_flow.measures.push_back(empirical_law(ens.paths, k));
    for (std::size_t i = 0; i < replicas; ++i)
        ens.seeds.push_back(derive_seed(seed, i, StreamSalt::replica));
    ens.residual_history = std::move(picard.residual_history);
    return ens;
}

Ensemble particle_system(const DiscretizedTriple& triple, std::size_t particles, double eps,
                         std::uint64_t seed, const SolverOptions& opts,
                         const std::vector<StateVector>& initial) {
    check_step_guard(triple, opts);
    if (particles < 2) throw ValidationError("particle_system: need at least 2 particles");
    if (!initial.empty() && initial.size() != particles)
        throw ValidationError("particle_system: need one initial state per particle");
    const std::size_t K = opts.K_steps;
    const double dt = triple.horizon() / static_cast<double>(K);
    const auto jumps = bucket_streams(triple, eps, particles, seed, K, StreamSalt::particle);

    Ensemble ens;
    ens.eps = eps;
    ens.paths = fresh_paths(triple, particles, K);
    for (std::size_t i = 0; i < initial.size(); ++i) {
        if (initial[i].size() != static_cast<Eigen::Index>(triple.dim()))
            throw ValidationError("particle_system: initial state has the wrong dimension");
        ens.paths[i].state(0) = initial[i];
    }
    ens.law_flow.time_grid = uniform_grid(triple.horizon(), K);
    for (std::size_t k = 0; k < K; ++k) {
        ens.law_flow.measures.push_back(empirical_law(ens.paths, k));
        const auto& mu = ens.law_flow.measures.back();
        if (opts.policy == ExecPolicy::serial) {
            particle_step_serial(triple, mu, eps, dt, k, jumps, ens.paths);
        } else {
            particle_step_omp(triple, mu, eps, dt, k, jumps, ens.paths);
        }
    }
    ens.law_flow.measures.push_back(empirical_law(ens.paths, K));
    for (std::size_t i = 0; i < particles; ++i)
        ens.seeds.push_back(derive_seed(seed, i, StreamSalt::particle));
    return ens;
}

double path_sup_sq(const DiscretizedTriple& triple, const Path& path) {
    double best = 0.0;
    for (std::size_t k = 0; k <= path.steps(); ++k) {
        const double r = norm(triple, Space::H, path.state(k));
        best = std::max(best, r * r);
    }
    return best;
}

double path_v_energy(const DiscretizedTriple& triple, const Path& path) {
    double acc = 0.0;
    const double dt = path.dt();
    for (std::size_t k = 0; k < path.steps(); ++k)
        acc += dt * std::pow(norm(triple, Space::V, path.state(k)), triple.alpha());
    return acc;
}

namespace {

// Burkholder-Davis-Gundy constant for the compensated jump martingale.
constexpr double kJumpMartingaleFactor = 57.0;

double jump_mass(const DiscretizedTriple& triple) { return triple.config().marks.total_mass(); }

}  // namespace

double moment_bound(const DiscretizedTriple& triple, double eps) {
    const double T = triple.horizon();
    const double l2 = triple.envelope_l2();
    const double lambda = std::max(triple.constants().combined_c(), 0.0) +
                          kJumpMartingaleFactor * eps * l2 * l2 * jump_mass(triple);
    const double x2 = std::pow(norm(triple, Space::H, triple.initial_state()), 2);
    return 6.0 * (x2 + lambda * T) * std::exp(4.0 * lambda * T);
}

double controlled_moment_bound(const DiscretizedTriple& triple, double eps, double N, double B0) {
    const double T = triple.horizon();
    const double l2 = triple.envelope_l2();
    const double mass = jump_mass(triple) * T;
    const double dev = deviation_bound(1.0, N, mass);
    const double c = std::max(triple.constants().combined_c(), 0.0);
    const double r = c * T + 4.0 * l2 * dev + kJumpMartingaleFactor * eps * l2 * l2 * (mass + dev);
    const double x2 = std::pow(norm(triple, Space::H, triple.initial_state()), 2);
    return 6.0 * (x2 + r * (B0 + 1.0)) * std::exp(4.0 * r);
}

MomentReport moment_report(const DiscretizedTriple& triple, const Ensemble& ensemble) {
    if (ensemble.paths.empty()) throw ValidationError("moment_report: empty ensemble");
    MomentReport rep;
    const auto m = static_cast<double>(ensemble.paths.size());
    double sq = 0.0;
    for (const auto& p : ensemble.paths) {
        const double s = path_sup_sq(triple, p);
        rep.sup_H_moment += s;
        sq += s * s;
        rep.v_energy += path_v_energy(triple, p);
    }
    rep.sup_H_moment /= m;
    rep.v_energy /= m;
    if (m > 1.0) {
        const double var = std::max(0.0, (sq - m * rep.sup_H_moment * rep.sup_H_moment) / (m - 1.0));
        rep.sup_H_moment_se = std::sqrt(var / m);
    }
    rep.bound_rhs = moment_bound(triple, ensemble.eps);
    return rep;
}

}  // namespace mvldp
