#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mvldp/measure.hpp"
#include "mvldp/mvsolve.hpp"
#include "mvldp/path.hpp"
#include "mvldp/prm.hpp"
#include "mvldp/triple.hpp"

namespace mvldp {

struct SkeletonSolution {
    Path path;
    Control control;
    MeasureFlow limit_flow;  ///< δ_{X⁰(t_k)}
    double q_cost = 0.0;
};

/// Noise-free limit dX⁰ = A(t, X⁰, δ_{X⁰}) dt by tamed Euler.
Path solve_limit(const DiscretizedTriple& triple, std::size_t K_steps);

/// Step index → control cell.  Throws ValidationError unless every control
/// breakpoint is a node of the uniform K-step grid.
std::vector<std::size_t> align_control(const Control& control, double T, std::size_t K);

/// dX^g = [A(t, X^g, δ_{X⁰}) + Σ f(t, X^g, δ_{X⁰}, z_j)(g_j - 1)θ_j] dt.
/// The measure argument always comes from limit_path, never from X^g.
SkeletonSolution solve_skeleton(const DiscretizedTriple& triple, const Control& control,
                                const Path& limit_path);

/// Stochastic controlled equation: law frozen to law_flow, jumps at
/// intensity ε⁻¹φ, control drift (φ - 1).
Path solve_controlled(const DiscretizedTriple& triple, double eps, const Control& control,
                      const MeasureFlow& law_flow, std::uint64_t seed,
                      const SolverOptions& opts = {}, std::size_t replica = 0);

std::vector<Path> solve_controlled_ensemble(const DiscretizedTriple& triple, double eps,
                                            const Control& control, const MeasureFlow& law_flow,
                                            std::size_t replicas, std::uint64_t seed,
                                            const SolverOptions& opts = {});

/// Bound on sup‖X^g‖²_H + 2δ∫‖X^g‖^α_V over g with Q(g) ≤ N.
double skeleton_energy_bound(const DiscretizedTriple& triple, const Path& limit_path, double N);

/// sup_k ‖a(t_k) - b(t_k)‖_H on a shared grid.
double sup_distance(const DiscretizedTriple& triple, const Path& a, const Path& b);

}  // namespace mvldp
