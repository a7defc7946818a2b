#include "mvldp/ldp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "mvldp/errors.hpp"
#include "mvldp/rng.hpp"

namespace mvldp {

RareEvent::RareEvent(const DiscretizedTriple& triple, RareEventSpec spec, Path limit_path)
    : triple_(&triple), spec_(std::move(spec)), limit_(std::move(limit_path)) {
    const auto n = static_cast<Eigen::Index>(triple.dim());
    if (spec_.direction.empty()) {
        direction_ = StateVector::Ones(n);
    } else {
        if (spec_.direction.size() != triple.dim())
            throw ValidationError("ldp.direction: expected " + std::to_string(triple.dim()) + " values");
        direction_ = Eigen::Map<const StateVector>(spec_.direction.data(), n);
    }
    if (!std::isfinite(spec_.threshold) && spec_.kind == EventKind::sup_deviation)
        throw ValidationError("ldp.threshold: must be finite for a sup-deviation event");
}

double RareEvent::slack(const Path& path) const {
    if (spec_.kind == EventKind::terminal_threshold) {
        const StateVector xt = path.terminal();
        const double inner = triple_->gram_is_identity()
                                 ? xt.dot(direction_)
                                 : xt.dot(triple_->h_gram() * direction_);
        return spec_.threshold - inner;
    }
    return spec_.threshold - sup_distance(*triple_, path, limit_);
}

std::pair<double, Path> rate_of_control(const DiscretizedTriple& triple, const Control& control,
                                        const Path& limit_path) {
    auto sol = solve_skeleton(triple, control, limit_path);
    return {sol.q_cost, std::move(sol.path)};
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kLogFloor = -30.0;
constexpr std::size_t kNelderMeadIterations = 400;
constexpr std::size_t kPenaltyStages = 8;  // rho = 10, 100, ..., 1e8

struct RateProblem {
    const DiscretizedTriple* triple;
    const RareEvent* event;
    std::vector<double> time_cells;
    std::size_t marks;
    double log_cap;
    double rho = 10.0;
    std::size_t evaluations = 0;

    Control control_of(const gsl_vector* u) const {
        Control c;
        c.time_cells = time_cells;
        c.values.resize(static_cast<Eigen::Index>(time_cells.size() - 1), static_cast<Eigen::Index>(marks));
        for (std::size_t i = 0; i < u->size; ++i)
            c.values.data()[i] = std::exp(std::clamp(gsl_vector_get(u, i), kLogFloor, log_cap));
        return c;
    }

    // (Q, event slack) of the control encoded by u
    std::pair<double, double> evaluate(const gsl_vector* u) {
        ++evaluations;
        const Control c = control_of(u);
        const auto [q, path] = rate_of_control(*triple, c, event->limit_path());
        return {q, event->slack(path)};
    }
};

double penalized(const gsl_vector* u, void* params) {
    auto* prob = static_cast<RateProblem*>(params);
    try {
        const auto [q, s] = prob->evaluate(u);
        const double v = std::max(0.0, s);
        return q + prob->rho * v * v;
    } catch (const BlowUpError&) {
        return std::numeric_limits<double>::max();
    }
}

struct Candidate {
    std::vector<double> u;
    double q = std::numeric_limits<double>::infinity();
    double slack = std::numeric_limits<double>::infinity();
};

}  // namespace

RateResult minimize_rate(const DiscretizedTriple& triple, const RareEventSpec& spec,
                         std::size_t budget, std::uint64_t seed, const RateOptions& opts) {
    if (budget < 1) throw ValidationError("ldp.budget: must be at least 1");
    if (opts.time_cells == 0) throw ValidationError("control.cells: must be at least 1");
    if (!(opts.g_max > 1.0)) throw ValidationError("ldp.g_max: must exceed 1");
    const auto& marks = triple.config().marks;
    const Path limit = solve_limit(triple, opts.K_steps);
    const RareEvent event(triple, spec, limit);

    RateResult result;
    const Control unit = Control::constant(triple.horizon(), opts.time_cells, marks.size(), 1.0);
    align_control(unit, triple.horizon(), opts.K_steps);
    result.argmin_control = unit;
    const double limit_slack = event.slack(limit);
    if (limit_slack <= 0.0) {
        result.feasible = true;
        result.i_value = 0.0;
        result.constraint_violation = 0.0;
        result.optimizer_trace.push_back({0, 0.0, limit_slack});
        return result;
    }

    RateProblem prob{&triple, &event, unit.time_cells, marks.size(), std::log(opts.g_max)};
    const std::size_t dim = opts.time_cells * marks.size();
    const std::size_t starts = std::max<std::size_t>(1, opts.starts);
    const std::size_t per_start = std::max<std::size_t>(1, budget / starts);

    gsl_set_error_handler_off();
    gsl_multimin_function fn{&penalized, dim, &prob};
    gsl_vector* x = gsl_vector_alloc(dim);
    gsl_vector* step = gsl_vector_alloc(dim);
    gsl_multimin_fminimizer* nm = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, dim);

    Candidate best_feasible;
    Candidate best_any;
    std::size_t iteration = 0;
    for (std::size_t s = 0; s < starts && prob.evaluations < budget; ++s) {
        Rng rng(derive_seed(seed, s, StreamSalt::optimizer));
        std::uniform_real_distribution<double> start(-1.0, 0.5 * std::log(opts.g_max));
        for (std::size_t i = 0; i < dim; ++i) gsl_vector_set(x, i, s == 0 ? 0.0 : start(rng));
        const std::size_t stop_at = std::min(budget, prob.evaluations + per_start);
        double step_size = 0.5;
        for (std::size_t stage = 0; stage < kPenaltyStages && prob.evaluations < stop_at; ++stage) {
            prob.rho = 10.0 * std::pow(10.0, static_cast<double>(stage));
            // each remaining stage gets an equal share of what is left for this start
            const std::size_t stage_stop =
                prob.evaluations + std::max<std::size_t>(1, (stop_at - prob.evaluations) / (kPenaltyStages - stage));
            gsl_vector_set_all(step, step_size);
            gsl_multimin_fminimizer_set(nm, &fn, x, step);
            for (std::size_t it = 0; it < kNelderMeadIterations && prob.evaluations < stage_stop; ++it) {
                if (gsl_multimin_fminimizer_iterate(nm) != GSL_SUCCESS) break;
                if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(nm), 1e-10) == GSL_SUCCESS) break;
            }
            gsl_vector_memcpy(x, gsl_multimin_fminimizer_x(nm));
            const auto [q, sl] = prob.evaluate(x);
            result.optimizer_trace.push_back({++iteration, q, sl});
            Candidate cand{std::vector<double>(x->data, x->data + dim), q, sl};
            if (sl <= opts.tolerance && q < best_feasible.q) best_feasible = cand;
            if (std::max(0.0, sl) < std::max(0.0, best_any.slack) ||
                (std::max(0.0, sl) == std::max(0.0, best_any.slack) && q < best_any.q))
                best_any = cand;
            step_size = std::max(0.05, 0.5 * step_size);
        }
    }
    gsl_multimin_fminimizer_free(nm);
    gsl_vector_free(step);
    gsl_vector_free(x);
    result.evaluations = prob.evaluations;

    const Candidate& chosen = std::isfinite(best_feasible.q) ? best_feasible : best_any;
    if (!chosen.u.empty()) {
        gsl_vector_const_view v = gsl_vector_const_view_array(chosen.u.data(), dim);
        result.argmin_control = prob.control_of(&v.vector);
        result.constraint_violation = std::max(0.0, chosen.slack);
    }
    result.feasible = std::isfinite(best_feasible.q);
    result.i_value = result.feasible ? best_feasible.q : std::numeric_limits<double>::infinity();
    return result;
}

// ---------------------------------------------------------------------------

std::pair<double, double> wilson_interval(std::size_t hits, std::size_t n) {
    if (n == 0) throw ValidationError("wilson_interval: need at least one trial");
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(hits) / nn;
    const double z2 = kWilsonZ * kWilsonZ;
    const double denom = 1.0 + z2 / nn;
    const double center = (p + z2 / (2.0 * nn)) / denom;
    const double half = kWilsonZ * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    const double lo = hits == 0 ? 0.0 : std::max(0.0, center - half);
    const double hi = hits == n ? 1.0 : std::min(1.0, center + half);
    return {lo, hi};
}

RareEventTable mc_rare_event(const DiscretizedTriple& triple, const RareEventSpec& spec,
                             const std::vector<double>& eps_list, std::size_t replicas,
                             std::uint64_t seed, const SolverOptions& opts, double picard_tol) {
    if (replicas == 0) throw ValidationError("discretization.replicas: must be at least 1");
    if (eps_list.empty()) throw ValidationError("noise.eps_list: need at least one value");
    for (double e : eps_list)
        if (!(e > 0.0)) throw ValidationError("noise.eps_list: every value must be positive");
    const RareEvent event(triple, spec, solve_limit(triple, opts.K_steps));
    RareEventTable table;
    for (std::size_t e = 0; e < eps_list.size(); ++e) {
        const double eps = eps_list[e];
        const auto ens = solve_mckean_vlasov(triple, eps, replicas, picard_tol,
                                             derive_seed(seed, e, StreamSalt::replica), opts);
        RareEventRow row;
        row.eps = eps;
        row.replicas = replicas;
        for (const auto& p : ens.paths) row.hit_count += event.hit(p) ? 1 : 0;
        std::tie(row.wilson_lo, row.wilson_hi) = wilson_interval(row.hit_count, replicas);
        row.p_hat = static_cast<double>(row.hit_count) / static_cast<double>(replicas);
        if (row.hit_count == 0) {
            row.upper_bound_only = true;
            row.p_hat = row.wilson_hi;
        }
        row.eps_log_p = eps * std::log(row.p_hat);
        table.push_back(row);
    }
    return table;
}

std::vector<ConditionARow> condition_a_diagnostic(const DiscretizedTriple& triple, const Control& g,
                                                  const ControlMatrix& perturbation,
                                                  const std::vector<double>& n_list,
                                                  std::size_t K_steps) {
    if (perturbation.rows() != g.values.rows() || perturbation.cols() != g.values.cols())
        throw ValidationError("condition_a_diagnostic: perturbation shape differs from the control");
    const Path limit = solve_limit(triple, K_steps);
    const Path base = solve_skeleton(triple, g, limit).path;
    std::vector<ConditionARow> rows;
    for (double n : n_list) {
        if (!(n > 0.0)) throw ValidationError("condition_a_diagnostic: n must be positive");
        Control gn = g;
        gn.values = g.values + perturbation / n;
        if ((gn.values.array() < 0.0).any())
            throw ValidationError("condition_a_diagnostic: g + perturbation/n is negative");
        rows.push_back({n, sup_distance(triple, solve_skeleton(triple, gn, limit).path, base)});
    }
    return rows;
}

std::vector<ConditionBRow> condition_b_diagnostic(const DiscretizedTriple& triple, const Control& phi,
                                                  const std::vector<double>& eps_list,
                                                  std::size_t replicas, std::uint64_t seed,
                                                  const SolverOptions& opts, double picard_tol) {
    if (replicas == 0) throw ValidationError("discretization.replicas: must be at least 1");
    const Path limit = solve_limit(triple, opts.K_steps);
    const Path skeleton = solve_skeleton(triple, phi, limit).path;
    std::vector<ConditionBRow> rows;
    for (std::size_t e = 0; e < eps_list.size(); ++e) {
        const double eps = eps_list[e];
        const std::uint64_t eps_seed = derive_seed(seed, e, StreamSalt::replica);
        const auto ens = solve_mckean_vlasov(triple, eps, replicas, picard_tol, eps_seed, opts);
        const auto paths = solve_controlled_ensemble(triple, eps, phi, ens.law_flow, replicas, eps_seed, opts);
        double sum = 0.0;
        double sq = 0.0;
        for (const auto& p : paths) {
            const double d = sup_distance(triple, p, skeleton);
            sum += d;
            sq += d * d;
        }
        const auto m = static_cast<double>(paths.size());
        const double mean = sum / m;
        const double var = m > 1.0 ? std::max(0.0, (sq - m * mean * mean) / (m - 1.0)) : 0.0;
        rows.push_back({eps, mean, std::sqrt(var / m)});
    }
    return rows;
}

}  // namespace mvldp
