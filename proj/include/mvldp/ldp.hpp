#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mvldp/mvsolve.hpp"
#include "mvldp/path.hpp"
#include "mvldp/prm.hpp"
#include "mvldp/skeleton.hpp"
#include "mvldp/triple.hpp"

namespace mvldp {

enum class EventKind { terminal_threshold, sup_deviation };

/// Either ⟨X(T), e⟩_H ≥ b or sup_t ‖X - X⁰‖_H ≥ δ_dev.
struct RareEventSpec {
    EventKind kind = EventKind::terminal_threshold;
    double threshold = 0.0;
    std::vector<double> direction;  ///< e; empty means all ones
    std::string description;

    bool operator==(const RareEventSpec&) const = default;
};

/// Bound event: carries the reference path needed by sup_deviation.
class RareEvent {
public:
    RareEvent(const DiscretizedTriple& triple, RareEventSpec spec, Path limit_path);

    /// Distance to the event boundary; ≤ 0 inside the event.
    double slack(const Path& path) const;
    bool hit(const Path& path) const { return slack(path) <= 0.0; }
    const RareEventSpec& spec() const noexcept { return spec_; }
    const Path& limit_path() const noexcept { return limit_; }

private:
    const DiscretizedTriple* triple_;
    RareEventSpec spec_;
    StateVector direction_;
    Path limit_;
};

struct RateTraceEntry {
    std::size_t iteration;
    double q;
    double slack;
};

struct RateResult {
    bool feasible = false;
    double i_value = 0.0;  ///< +inf when infeasible
    Control argmin_control;
    double constraint_violation = 0.0;
    std::vector<RateTraceEntry> optimizer_trace;
    std::size_t evaluations = 0;
};

struct RateOptions {
    std::size_t time_cells = 1;
    std::size_t K_steps = 1000;
    double g_max = 50.0;
    double tolerance = 1e-6;  ///< accepted constraint violation
    std::size_t starts = 5;
};

/// (Q(g), X^g).
std::pair<double, Path> rate_of_control(const DiscretizedTriple& triple, const Control& control,
                                        const Path& limit_path);

/// min Q(g) subject to the event, over piecewise-constant g on
/// `opts.time_cells` × (mark count) cells.  Exterior penalty with escalating
/// weight and Nelder-Mead over log g.
RateResult minimize_rate(const DiscretizedTriple& triple, const RareEventSpec& event,
                         std::size_t budget, std::uint64_t seed, const RateOptions& opts = {});

inline constexpr double kWilsonZ = 1.959963984540054;

/// 95% Wilson score interval for hits/n.
std::pair<double, double> wilson_interval(std::size_t hits, std::size_t n);

struct RareEventRow {
    double eps = 0.0;
    std::size_t replicas = 0;
    std::size_t hit_count = 0;
    double p_hat = 0.0;
    double eps_log_p = 0.0;
    double wilson_lo = 0.0;
    double wilson_hi = 0.0;
    bool upper_bound_only = false;  ///< zero hits: p_hat is the Wilson upper limit
};

using RareEventTable = std::vector<RareEventRow>;

RareEventTable mc_rare_event(const DiscretizedTriple& triple, const RareEventSpec& event,
                             const std::vector<double>& eps_list, std::size_t replicas,
                             std::uint64_t seed, const SolverOptions& opts = {},
                             double picard_tol = 1e-8);

struct ConditionARow {
    double n;
    double sup_dist;
};

/// sup_t ‖X^{g + p/n} - X^g‖_H for each n.
std::vector<ConditionARow> condition_a_diagnostic(const DiscretizedTriple& triple, const Control& g,
                                                  const ControlMatrix& perturbation,
                                                  const std::vector<double>& n_list,
                                                  std::size_t K_steps);

struct ConditionBRow {
    double eps;
    double mean_sup_dist;
    double se;
};

/// Mean over replicas of sup_t ‖X^{φ,ε} - Y^φ‖_H, with X^{φ,ε} the
/// controlled solve under the ε-law and Y^φ the skeleton path.
std::vector<ConditionBRow> condition_b_diagnostic(const DiscretizedTriple& triple, const Control& phi,
                                                  const std::vector<double>& eps_list,
                                                  std::size_t replicas, std::uint64_t seed,
                                                  const SolverOptions& opts = {},
                                                  double picard_tol = 1e-8);

}  // namespace mvldp
