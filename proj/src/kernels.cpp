#include "mvldp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <string>

#include <omp.h>

#include "mvldp/errors.hpp"

namespace mvldp {

Path::Path(double T, std::size_t K, std::size_t dim)
    : time_grid(uniform_grid(T, K)),
      states(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(K + 1))) {}

std::vector<double> uniform_grid(double T, std::size_t K) {
    if (K == 0) throw ValidationError("K_steps must be at least 1");
    std::vector<double> grid(K + 1);
    for (std::size_t k = 0; k <= K; ++k) grid[k] = T * static_cast<double>(k) / static_cast<double>(K);
    grid.back() = T;
    return grid;
}

int worker_count() {
    if (const char* env = std::getenv("MVLDP_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
    }
    return omp_get_max_threads();
}

StepJumps StepJumps::bucket(const JumpStream& stream, double dt, std::size_t K) {
    StepJumps out;
    out.offsets.assign(K + 1, 0);
    std::vector<std::size_t> step_of(stream.events.size());
    for (std::size_t e = 0; e < stream.events.size(); ++e) {
        // event at t belongs to the step (t_k, t_{k+1}] with k = ceil(t/dt) - 1
        const double pos = std::ceil(stream.events[e].t / dt) - 1.0;
        const auto k = static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(K - 1)));
        step_of[e] = k;
        ++out.offsets[k + 1];
    }
    for (std::size_t k = 0; k < K; ++k) out.offsets[k + 1] += out.offsets[k];
    out.marks.resize(stream.events.size());
    std::vector<std::size_t> fill(out.offsets.begin(), out.offsets.end() - 1);
    for (std::size_t e = 0; e < stream.events.size(); ++e)
        out.marks[fill[step_of[e]]++] = stream.events[e].mark;
    return out;
}

void euler_step(const DiscretizedTriple& triple, double t, ConstVecRef x, const EmpiricalMeasure& mu,
                std::span<const std::size_t> jump_marks, std::span<const double> control_row,
                double eps, double dt, bool tame, VecRef out) {
    drift_A(triple, t, x, mu, out);
    double scale = dt;
    if (tame) scale = dt / (1.0 + dt * norm(triple, Space::V_star, out));
    out *= scale;
    out += x;

    const auto& cfg = triple.config();
    if (cfg.sigma == 0.0) return;
    const auto& marks = cfg.marks;
    // every f(·, z_j) is σ·z_j·s(x, μ)·e, so only the scalar weights differ
    double jumps = 0.0;
    for (std::size_t j : jump_marks) jumps += marks.points[j];
    double compensator = 0.0;
    double control_drift = 0.0;
    for (std::size_t j = 0; j < marks.size(); ++j) {
        const double g = control_row.empty() ? 1.0 : control_row[j];
        compensator += marks.points[j] * g * marks.weights[j];
        control_drift += marks.points[j] * (g - 1.0) * marks.weights[j];
    }
    const double weight = dt * control_drift + eps * jumps - dt * compensator;
    if (weight != 0.0)
        out += (cfg.sigma * jump_amplitude(triple, x, mu) * weight) * triple.jump_profile();
}

void check_finite(const DiscretizedTriple& triple, ConstVecRef x, std::size_t step,
                  std::size_t replica) {
    if (!x.allFinite())
        throw BlowUpError(step, replica,
                          "blow-up at step " + std::to_string(step) + " (replica " +
                              std::to_string(replica) + "): non-finite state");
    const double r = norm(triple, Space::H, x);
    if (!(r <= kBlowUpThreshold))
        throw BlowUpError(step, replica,
                          "blow-up at step " + std::to_string(step) + " (replica " +
                              std::to_string(replica) + "): |x|_H exceeds 1e12");
}

namespace {

void advance_one(const FrozenSegment& seg, const StepJumps& jumps, Path& path, std::size_t replica) {
    StateVector next(static_cast<Eigen::Index>(seg.triple.dim()));
    for (std::size_t k = seg.k_begin; k < seg.k_end; ++k) {
        const std::span<const double> row =
            seg.control ? seg.control->row(seg.control_cell_of_step[k]) : std::span<const double>{};
        euler_step(seg.triple, static_cast<double>(k) * seg.dt, path.state(k), seg.flow.measures[k],
                   jumps.at(k), row, seg.eps, seg.dt, seg.tame, next);
        check_finite(seg.triple, next, k + 1, replica);
        path.state(k + 1) = next;
    }
}

void check_segment(const FrozenSegment& seg, const std::vector<StepJumps>& jumps,
                   const std::vector<Path>& paths) {
    if (jumps.size() != paths.size()) throw ValidationError("advance_replicas: one stream per replica");
    if (seg.flow.size() < seg.k_end)
        throw ValidationError("advance_replicas: law flow shorter than the segment");
    if (seg.control && seg.control_cell_of_step.size() < seg.k_end)
        throw ValidationError("advance_replicas: control cells do not cover the segment");
}

// Runs body(i) for every i; the exception of the lowest failing index wins,
// independent of scheduling.
template <class Body>
void omp_for_each(std::size_t count, Body&& body) {
    std::vector<std::exception_ptr> errors(count);
    const auto n = static_cast<long long>(count);
#pragma omp parallel for schedule(static) num_threads(worker_count())
    for (long long i = 0; i < n; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace

void advance_replicas_serial(const FrozenSegment& seg, const std::vector<StepJumps>& jumps,
                             std::vector<Path>& paths) {
    check_segment(seg, jumps, paths);
    for (std::size_t i = 0; i < paths.size(); ++i) advance_one(seg, jumps[i], paths[i], i);
}

void advance_replicas_omp(const FrozenSegment& seg, const std::vector<StepJumps>& jumps,
                          std::vector<Path>& paths) {
    check_segment(seg, jumps, paths);
    omp_for_each(paths.size(), [&](std::size_t i) { advance_one(seg, jumps[i], paths[i], i); });
}

void advance_replicas(ExecPolicy policy, const FrozenSegment& seg,
                      const std::vector<StepJumps>& jumps, std::vector<Path>& paths) {
    if (policy == ExecPolicy::serial) {
        advance_replicas_serial(seg, jumps, paths);
    } else {
        advance_replicas_omp(seg, jumps, paths);
    }
}

namespace {

void particle_one(const DiscretizedTriple& triple, const EmpiricalMeasure& mu, double eps, double dt,
                  std::size_t k, const StepJumps& jumps, Path& path, std::size_t i) {
    StateVector next(static_cast<Eigen::Index>(triple.dim()));
    euler_step(triple, static_cast<double>(k) * dt, path.state(k), mu, jumps.at(k), {}, eps, dt, true,
               next);
    check_finite(triple, next, k + 1, i);
    path.state(k + 1) = next;
}

}  // namespace

void particle_step_serial(const DiscretizedTriple& triple, const EmpiricalMeasure& mu, double eps,
                          double dt, std::size_t k, const std::vector<StepJumps>& jumps,
                          std::vector<Path>& paths) {
    for (std::size_t i = 0; i < paths.size(); ++i) particle_one(triple, mu, eps, dt, k, jumps[i], paths[i], i);
}

void particle_step_omp(const DiscretizedTriple& triple, const EmpiricalMeasure& mu, double eps,
                       double dt, std::size_t k, const std::vector<StepJumps>& jumps,
                       std::vector<Path>& paths) {
    omp_for_each(paths.size(),
                 [&](std::size_t i) { particle_one(triple, mu, eps, dt, k, jumps[i], paths[i], i); });
}

EmpiricalMeasure empirical_law(const std::vector<Path>& paths, std::size_t k) {
    if (paths.empty()) throw ValidationError("empirical_law: no replicas");
    const std::size_t n = paths.front().dim();
    std::vector<double> atoms(n * paths.size());
    for (std::size_t i = 0; i < paths.size(); ++i) {
        const auto x = paths[i].state(k);
        for (std::size_t d = 0; d < n; ++d) atoms[i * n + d] = x[static_cast<Eigen::Index>(d)];
    }
    return EmpiricalMeasure::uniform(n, std::move(atoms));
}

}  // namespace mvldp
