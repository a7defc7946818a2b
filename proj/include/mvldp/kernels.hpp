#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mvldp/measure.hpp"
#include "mvldp/path.hpp"
#include "mvldp/prm.hpp"
#include "mvldp/triple.hpp"

namespace mvldp {

enum class ExecPolicy { serial, parallel };

/// Worker count for parallel kernels: MVLDP_THREADS if set and positive,
/// otherwise the OpenMP default.
int worker_count();

/// Jump marks of one stream bucketed by Euler step: step k covers (t_k, t_{k+1}].
struct StepJumps {
    std::vector<std::size_t> offsets;  ///< size K+1
    std::vector<std::size_t> marks;

    static StepJumps bucket(const JumpStream& stream, double dt, std::size_t K);
    std::span<const std::size_t> at(std::size_t k) const {
        return {marks.data() + offsets[k], offsets[k + 1] - offsets[k]};
    }
};

inline constexpr double kBlowUpThreshold = 1e12;

/// One step of the compensated scheme
///   x' = x + dt·A/(1 + dt‖A‖_{V*}) + dt·Σ f_j(g_j - 1)θ_j + ε·Σ_jumps f - dt·Σ f_j g_j θ_j
/// with g ≡ 1 when `control_row` is empty.  `tame = false` uses the raw drift.
void euler_step(const DiscretizedTriple& triple, double t, ConstVecRef x, const EmpiricalMeasure& mu,
                std::span<const std::size_t> jump_marks, std::span<const double> control_row,
                double eps, double dt, bool tame, VecRef out);

/// Throws BlowUpError when x is non-finite or ‖x‖_H exceeds kBlowUpThreshold.
void check_finite(const DiscretizedTriple& triple, ConstVecRef x, std::size_t step,
                  std::size_t replica);

/// Shared inputs of a frozen-law segment [k_begin, k_end] of the grid.
struct FrozenSegment {
    const DiscretizedTriple& triple;
    const MeasureFlow& flow;  ///< law at node k is used on step k
    double eps;
    double dt;
    std::size_t k_begin;
    std::size_t k_end;
    bool tame = true;
    const Control* control = nullptr;  ///< cells aligned to grid nodes
    std::span<const std::size_t> control_cell_of_step = {};
};

/// Advance every replica over the segment.  paths[i] must already hold its
/// state at k_begin.  Blow-ups are rethrown for the lowest failing replica.
void advance_replicas_serial(const FrozenSegment& seg, const std::vector<StepJumps>& jumps,
                             std::vector<Path>& paths);
void advance_replicas_omp(const FrozenSegment& seg, const std::vector<StepJumps>& jumps,
                          std::vector<Path>& paths);
void advance_replicas(ExecPolicy policy, const FrozenSegment& seg,
                      const std::vector<StepJumps>& jumps, std::vector<Path>& paths);

/// One synchronous step of an interacting particle system: every particle
/// moves from node k to k+1 under the common measure mu.
void particle_step_serial(const DiscretizedTriple& triple, const EmpiricalMeasure& mu, double eps,
                          double dt, std::size_t k, const std::vector<StepJumps>& jumps,
                          std::vector<Path>& paths);
void particle_step_omp(const DiscretizedTriple& triple, const EmpiricalMeasure& mu, double eps,
                       double dt, std::size_t k, const std::vector<StepJumps>& jumps,
                       std::vector<Path>& paths);

/// Empirical law of the replicas at node k, atoms in replica order.
EmpiricalMeasure empirical_law(const std::vector<Path>& paths, std::size_t k);

}  // namespace mvldp
