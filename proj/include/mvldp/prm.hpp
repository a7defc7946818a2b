#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "mvldp/state.hpp"
#include "mvldp/triple.hpp"

namespace mvldp {

using ControlMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Nonnegative intensity g(t, z) that is piecewise constant on a
/// (time cell × mark point) grid.
struct Control {
    std::vector<double> time_cells;  ///< breakpoints 0 = τ₀ < … < τ_C = T
    ControlMatrix values;            ///< C × (mark count)

    static Control constant(double T, std::size_t cells, std::size_t marks, double value);

    std::size_t cells() const noexcept { return static_cast<std::size_t>(values.rows()); }
    std::size_t marks() const noexcept { return static_cast<std::size_t>(values.cols()); }
    double horizon() const { return time_cells.back(); }

    /// Throws ValidationError on negative/non-finite values or a malformed grid.
    void validate(std::size_t mark_count) const;
    /// Index of the cell (τ_c, τ_{c+1}] that contains t; t = 0 maps to cell 0.
    std::size_t cell_at(double t) const;
    std::span<const double> row(std::size_t cell) const {
        return {values.data() + cell * marks(), marks()};
    }

    friend bool operator==(const Control& a, const Control& b) {
        return a.time_cells == b.time_cells && a.values.rows() == b.values.rows() &&
               a.values.cols() == b.values.cols() && a.values == b.values;
    }
};

struct JumpEvent {
    double t;
    std::size_t mark;

    bool operator==(const JumpEvent&) const = default;
};

/// Realization of a controlled Poisson random measure on (0, T] × Z.
struct JumpStream {
    std::vector<JumpEvent> events;
    double intensity_scale = 1.0;

    bool operator==(const JumpStream&) const = default;
};

/// l(r) = r log r - r + 1, with l(0) = 1.
double entropy_l(double r);

/// Q(g) = Σ_cells Σ_marks l(g)·θ·Δt, exact for piecewise-constant g.
double control_cost_Q(const Control& control, const MarkSpace& marks);

/// Exact thinning: Poisson(scale·g·θ·Δt) events per (cell, mark) with
/// uniform times in the cell.  Ties are ordered by mark, then insertion.
JumpStream sample_prm(const MarkSpace& marks, const Control& control, double intensity_scale,
                      std::uint64_t seed);

/// Σ_j f(t, x, μ, z_j)·(g_j - 1)·θ_j.
StateVector compensator_drift(const DiscretizedTriple& triple, double t, ConstVecRef x,
                              const EmpiricalMeasure& mu, std::span<const double> control_row);
void compensator_drift(const DiscretizedTriple& triple, double t, ConstVecRef x,
                       const EmpiricalMeasure& mu, std::span<const double> control_row,
                       VecRef out);

/// Largest s with r - 1 = s and l(r) = level, r ≥ 1 (upper inverse of l).
double entropy_upper_inverse(double level);

/// Sharp constant C with Σ χ|g-1|θΔt ≤ C for every piecewise-constant g
/// with Q(g) ≤ N, when χ is constant and θ(Z)·T = mass.
double deviation_bound(double chi, double N, double mass);

/// CSV with header `t,mark_index,z_value`.
void write_jump_stream_csv(std::ostream& os, const JumpStream& stream, const MarkSpace& marks);

}  // namespace mvldp
