#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mvldp/kernels.hpp"
#include "mvldp/measure.hpp"
#include "mvldp/path.hpp"
#include "mvldp/rng.hpp"
#include "mvldp/triple.hpp"

namespace mvldp {

struct SolverOptions {
    std::size_t K_steps = 100;
    /// Disables taming and the PDE step-size guard.  Only for negative controls.
    bool unsafe_explicit = false;
    std::size_t max_outer = 50;
    /// Picard window length; 0 selects min(T, 0.9 / (2·max(c_mono, 1e-6))).
    double window = 0.0;
    ExecPolicy policy = ExecPolicy::parallel;
};

/// Throws ValidationError if dt violates dt ≤ min(0.1/|c_mono|, h^α) on a PDE model.
void check_step_guard(const DiscretizedTriple& triple, const SolverOptions& opts);

double default_window(const DiscretizedTriple& triple);

/// Frozen-law Euler step with g ≡ 1 (see euler_step).
StateVector euler_step_frozen(const DiscretizedTriple& triple, double t, ConstVecRef x,
                              const EmpiricalMeasure& mu_t,
                              std::span<const std::size_t> jump_marks, double eps, double dt);

/// Uncontrolled jump stream of one replica, intensity ε⁻¹θ on (0, T].
JumpStream replica_stream(const DiscretizedTriple& triple, double eps, std::uint64_t seed,
                          std::size_t replica, StreamSalt salt = StreamSalt::replica);

Path solve_frozen(const DiscretizedTriple& triple, const MeasureFlow& law_flow, double eps,
                  std::uint64_t seed, const SolverOptions& opts = {}, std::size_t replica = 0);

struct PicardResult {
    MeasureFlow flow;
    std::vector<std::vector<double>> residual_history;  ///< one list per window
    std::vector<std::size_t> window_nodes;              ///< node index where each window starts
    std::vector<Path> paths;                             ///< replicas from the last iterate
};

PicardResult picard_law_flow(const DiscretizedTriple& triple, double eps, std::size_t replicas,
                             double tol, std::uint64_t seed, const SolverOptions& opts = {});

struct Ensemble {
    std::vector<Path> paths;
    MeasureFlow law_flow;  ///< atoms at node k are the replica states at node k
    double eps = 1.0;
    std::vector<std::uint64_t> seeds;
    std::vector<std::vector<double>> residual_history;
};

Ensemble solve_mckean_vlasov(const DiscretizedTriple& triple, double eps, std::size_t replicas,
                             double tol, std::uint64_t seed, const SolverOptions& opts = {});

/// N coupled particles; the measure argument is their running empirical law.
/// `initial` holds one state per particle, or is empty for the configured x.
Ensemble particle_system(const DiscretizedTriple& triple, std::size_t particles, double eps,
                         std::uint64_t seed, const SolverOptions& opts = {},
                         const std::vector<StateVector>& initial = {});

struct MomentReport {
    double sup_H_moment = 0.0;  ///< mean over replicas of sup_t ‖X‖²_H
    double v_energy = 0.0;      ///< mean over replicas of ∫ ‖X‖^α_V dt
    double bound_rhs = 0.0;
    double sup_H_moment_se = 0.0;
};

/// sup_t ‖X(t)‖²_H and ∫ ‖X‖^α_V dt (left Riemann sum) for one path.
double path_sup_sq(const DiscretizedTriple& triple, const Path& path);
double path_v_energy(const DiscretizedTriple& triple, const Path& path);

/// Bound for E sup‖X^ε‖²_H + 2δ E∫‖X^ε‖^α_V from the model constants:
/// 6(‖x‖² + ΛT)e^{4ΛT}, Λ = c + 57·ε·l₂²·θ(Z).
double moment_bound(const DiscretizedTriple& triple, double eps);
/// Same for a controlled solve with Q(φ) ≤ N and frozen law of second moment ≤ B0.
double controlled_moment_bound(const DiscretizedTriple& triple, double eps, double N, double B0);

MomentReport moment_report(const DiscretizedTriple& triple, const Ensemble& ensemble);

}  // namespace mvldp
