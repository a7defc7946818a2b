#include "mvldp/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mvldp/config.hpp"
#include "mvldp/errors.hpp"
#include "mvldp/io.hpp"
#include "mvldp/ldp.hpp"
#include "mvldp/mvsolve.hpp"
#include "mvldp/skeleton.hpp"

namespace mvldp {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Invocation {
    std::string command;
    RunConfig config;
    fs::path config_dir;
    fs::path out_dir;
    bool quiet = false;
};

std::vector<double> to_vector(ConstVecRef v) { return {v.begin(), v.end()}; }

json control_json(const Control& c) {
    json rows = json::array();
    for (std::size_t i = 0; i < c.cells(); ++i) {
        const auto r = c.row(i);
        rows.push_back(std::vector<double>(r.begin(), r.end()));
    }
    return {{"time_cells", c.time_cells}, {"values", rows}};
}

std::string control_csv(const Control& c) {
    std::ostringstream o;
    o << "t_start,t_end";
    for (std::size_t j = 0; j < c.marks(); ++j) o << ",g_" << j;
    o << '\n';
    for (std::size_t i = 0; i < c.cells(); ++i) {
        o << format_double(c.time_cells[i]) << ',' << format_double(c.time_cells[i + 1]);
        for (double g : c.row(i)) o << ',' << format_double(g);
        o << '\n';
    }
    return o.str();
}

json base_summary(const Invocation& inv, const DiscretizedTriple& triple) {
    return {{"command", inv.command},
            {"version", std::string(version_string())},
            {"seed", inv.config.base_seed},
            {"config", config_to_json(inv.config, triple)}};
}

void emit_json(const Invocation& inv, const std::string& name, const json& j) {
    if (inv.config.wants("json")) write_text_file(inv.out_dir / name, j.dump(2) + "\n");
}

void emit_csv(const Invocation& inv, const std::string& name, const std::string& text) {
    if (inv.config.wants("csv")) write_text_file(inv.out_dir / name, text);
}

void emit_ensemble(const Invocation& inv, const Ensemble& ens) {
    if (!inv.config.wants("csv")) return;
    std::ostringstream paths;
    write_paths_csv(paths, ens.paths);
    write_text_file(inv.out_dir / "paths.csv", paths.str());
    for (std::size_t k = 0; k < ens.law_flow.size(); ++k) {
        std::ostringstream node;
        write_measure_csv(node, ens.law_flow.measures[k]);
        char name[32];
        std::snprintf(name, sizeof name, "node_%05zu.csv", k);
        write_text_file(inv.out_dir / "law_flow" / name, node.str());
    }
}

std::vector<double> terminal_mean(const Ensemble& ens) {
    return to_vector(ens.law_flow.measures.back().mean());
}

std::string short_vector(const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size() && i < 4; ++i) s += (i ? "," : "") + format_double(v[i]);
    if (v.size() > 4) s += ",...";
    return s + "]";
}

int cmd_ensemble(const Invocation& inv, const DiscretizedTriple& triple, std::ostream& out) {
    const auto& c = inv.config;
    const bool particles = inv.command == "particles";
    const Ensemble ens =
        particles ? particle_system(triple, c.discretization.replicas, c.noise.eps, c.base_seed,
                                    c.solver_options())
                  : solve_mckean_vlasov(triple, c.noise.eps, c.discretization.replicas,
                                        c.discretization.picard_tol, c.base_seed, c.solver_options());
    const MomentReport mom = moment_report(triple, ens);
    emit_ensemble(inv, ens);
    json s = base_summary(inv, triple);
    s["eps"] = ens.eps;
    s["replicas"] = ens.paths.size();
    s["seeds"] = ens.seeds;
    s["residual_history"] = ens.residual_history;
    s["terminal_mean"] = terminal_mean(ens);
    s["moments"] = {{"sup_H_moment", mom.sup_H_moment},
                    {"sup_H_moment_se", mom.sup_H_moment_se},
                    {"v_energy", mom.v_energy},
                    {"bound_rhs", mom.bound_rhs}};
    emit_json(inv, "summary.json", s);
    if (!inv.quiet) {
        std::size_t iterations = 0;
        for (const auto& w : ens.residual_history) iterations += w.size();
        out << inv.command << ": replicas=" << ens.paths.size() << " K=" << c.discretization.K_steps
            << " eps=" << format_double(ens.eps);
        if (!particles) out << " picard_windows=" << ens.residual_history.size() << " iterations=" << iterations;
        out << " terminal_mean=" << short_vector(terminal_mean(ens))
            << " sup_moment=" << format_double(mom.sup_H_moment)
            << " bound=" << format_double(mom.bound_rhs) << " out=" << inv.out_dir.string() << '\n';
    }
    return kExitOk;
}

int cmd_limit(const Invocation& inv, const DiscretizedTriple& triple, std::ostream& out) {
    const Path path = solve_limit(triple, inv.config.discretization.K_steps);
    std::ostringstream csv;
    write_path_csv(csv, path);
    emit_csv(inv, "limit.csv", csv.str());
    json s = base_summary(inv, triple);
    s["terminal"] = to_vector(path.terminal());
    s["sup_H_sq"] = path_sup_sq(triple, path);
    emit_json(inv, "limit.json", s);
    if (!inv.quiet)
        out << "limit: K=" << path.steps() << " terminal=" << short_vector(to_vector(path.terminal()))
            << " out=" << inv.out_dir.string() << '\n';
    return kExitOk;
}

int cmd_skeleton(const Invocation& inv, const DiscretizedTriple& triple, std::ostream& out) {
    const Control control = build_control(inv.config, inv.config_dir.string());
    const Path limit = solve_limit(triple, inv.config.discretization.K_steps);
    const SkeletonSolution sol = solve_skeleton(triple, control, limit);
    std::ostringstream csv;
    write_path_csv(csv, sol.path);
    emit_csv(inv, "skeleton.csv", csv.str());
    const double energy = path_sup_sq(triple, sol.path) + 2.0 * triple.delta() * path_v_energy(triple, sol.path);
    json s = base_summary(inv, triple);
    s["q_cost"] = sol.q_cost;
    s["control"] = control_json(control);
    s["terminal"] = to_vector(sol.path.terminal());
    s["energy"] = energy;
    s["energy_bound"] = skeleton_energy_bound(triple, limit, sol.q_cost);
    s["sup_distance_to_limit"] = sup_distance(triple, sol.path, limit);
    emit_json(inv, "skeleton.json", s);
    if (!inv.quiet)
        out << "skeleton: Q=" << format_double(sol.q_cost)
            << " terminal=" << short_vector(to_vector(sol.path.terminal()))
            << " out=" << inv.out_dir.string() << '\n';
    return kExitOk;
}

int cmd_controlled(const Invocation& inv, const DiscretizedTriple& triple, std::ostream& out) {
    const auto& c = inv.config;
    const Control control = build_control(c, inv.config_dir.string());
    const Ensemble ens = solve_mckean_vlasov(triple, c.noise.eps, c.discretization.replicas,
                                             c.discretization.picard_tol, c.base_seed, c.solver_options());
    const auto paths = solve_controlled_ensemble(triple, c.noise.eps, control, ens.law_flow,
                                                 c.discretization.replicas, c.base_seed, c.solver_options());
    std::ostringstream csv;
    write_paths_csv(csv, paths);
    emit_csv(inv, "controlled_paths.csv", csv.str());
    double sup_moment = 0.0;
    double energy = 0.0;
    for (const auto& p : paths) {
        sup_moment += path_sup_sq(triple, p);
        energy += path_v_energy(triple, p);
    }
    sup_moment /= static_cast<double>(paths.size());
    energy /= static_cast<double>(paths.size());
    double b0 = 0.0;
    for (const auto& mu : ens.law_flow.measures) b0 = std::max(b0, second_moment(triple, mu));
    const double q = control_cost_Q(control, triple.config().marks);
    json s = base_summary(inv, triple);
    s["q_cost"] = q;
    s["control"] = control_json(control);
    s["sup_H_moment"] = sup_moment;
    s["v_energy"] = energy;
    s["bound_rhs"] = controlled_moment_bound(triple, c.noise.eps, q, b0);
    emit_json(inv, "controlled.json", s);
    if (!inv.quiet)
        out << "controlled: replicas=" << paths.size() << " eps=" << format_double(c.noise.eps)
            << " Q=" << format_double(q) << " sup_moment=" << format_double(sup_moment)
            << " out=" << inv.out_dir.string() << '\n';
    return kExitOk;
}

json rate_json(const RateResult& r) {
    json trace = json::array();
    for (const auto& t : r.optimizer_trace) trace.push_back({t.iteration, t.q, t.slack});
    return {{"feasible", r.feasible},
            {"i_value", r.feasible ? json(r.i_value) : json("inf")},
            {"constraint_violation", r.constraint_violation},
            {"evaluations", r.evaluations},
            {"argmin_control", control_json(r.argmin_control)},
            {"optimizer_trace", trace}};
}

void emit_rate(const Invocation& inv, const RateResult& r) {
    emit_csv(inv, "rate_control.csv", control_csv(r.argmin_control));
    std::ostringstream trace;
    trace << "iteration,q,slack\n";
    for (const auto& t : r.optimizer_trace)
        trace << t.iteration << ',' << format_double(t.q) << ',' << format_double(t.slack) << '\n';
    emit_csv(inv, "rate_trace.csv", trace.str());
}

int cmd_rate(const Invocation& inv, const DiscretizedTriple& triple, std::ostream& out) {
    const auto& c = inv.config;
    const RateResult r = minimize_rate(triple, c.ldp.event, c.ldp.budget, c.base_seed, c.rate_options());
    emit_rate(inv, r);
    json s = base_summary(inv, triple);
    s["rate"] = rate_json(r);
    emit_json(inv, "rate.json", s);
    if (!inv.quiet)
        out << "rate: feasible=" << (r.feasible ? "true" : "false")
            << " I_grid=" << format_double(r.i_value)
            << " violation=" << format_double(r.constraint_violation)
            << " evaluations=" << r.evaluations << " out=" << inv.out_dir.string() << '\n';
    return r.feasible ? kExitOk : kExitRuntime;
}

int cmd_ldp(const Invocation& inv, const DiscretizedTriple& triple, std::ostream& out) {
    const auto& c = inv.config;
    const RareEventTable table = mc_rare_event(triple, c.ldp.event, c.noise.eps_list, c.discretization.replicas,
                                               c.base_seed, c.solver_options(), c.discretization.picard_tol);
    const RateResult rate = minimize_rate(triple, c.ldp.event, c.ldp.budget, c.base_seed, c.rate_options());
    std::ostringstream csv;
    csv << "eps,replicas,hit_count,p_hat,eps_log_p,wilson_lo,wilson_hi,upper_bound_only\n";
    json rows = json::array();
    for (const auto& r : table) {
        csv << format_double(r.eps) << ',' << r.replicas << ',' << r.hit_count << ','
            << format_double(r.p_hat) << ',' << format_double(r.eps_log_p) << ','
            << format_double(r.wilson_lo) << ',' << format_double(r.wilson_hi) << ','
            << (r.upper_bound_only ? 1 : 0) << '\n';
        rows.push_back({{"eps", r.eps},
                        {"replicas", r.replicas},
                        {"hit_count", r.hit_count},
                        {"p_hat", r.p_hat},
                        {"eps_log_p", r.eps_log_p},
                        {"wilson_interval", {r.wilson_lo, r.wilson_hi}},
                        {"upper_bound_only", r.upper_bound_only}});
    }
    emit_csv(inv, "ldp_table.csv", csv.str());
    emit_rate(inv, rate);
    json s = base_summary(inv, triple);
    s["table"] = rows;
    s["rate"] = rate_json(rate);
    emit_json(inv, "ldp.json", s);
    if (!inv.quiet) {
        out << "ldp: rows=" << table.size() << " I_grid=" << format_double(rate.i_value);
        for (const auto& r : table)
            out << " eps=" << format_double(r.eps) << ":eps_log_p=" << format_double(r.eps_log_p);
        out << " out=" << inv.out_dir.string() << '\n';
    }
    return kExitOk;
}

int cmd_verify(const Invocation& inv, const DiscretizedTriple& triple, std::ostream& out) {
    const HypothesisReport rep = check_hypotheses(triple, inv.config.verify_samples, inv.config.base_seed);
    json records = json::array();
    for (const auto& r : rep.records) {
        json rec = {{"name", std::string(to_string(r.name))},
                    {"samples_tested", r.samples_tested},
                    {"violations", r.violations},
                    {"worst_margin", r.worst_margin}};
        if (r.witness) {
            const auto& w = *r.witness;
            rec["witness"] = {{"t", w.t},
                              {"x", to_vector(w.x)},
                              {"y", to_vector(w.y)},
                              {"mu_atoms", std::vector<double>(w.mu.atoms().begin(), w.mu.atoms().end())},
                              {"mu_weights", std::vector<double>(w.mu.weights().begin(), w.mu.weights().end())},
                              {"nu_atoms", std::vector<double>(w.nu.atoms().begin(), w.nu.atoms().end())},
                              {"nu_weights", std::vector<double>(w.nu.weights().begin(), w.nu.weights().end())},
                              {"direction", to_vector(w.direction)}};
        }
        records.push_back(rec);
    }
    json s = base_summary(inv, triple);
    s["hypotheses"] = records;
    s["total_violations"] = rep.total_violations();
    emit_json(inv, "verify.json", s);
    if (!inv.quiet) {
        out << "verify: model=" << to_string(triple.kind()) << " samples=" << inv.config.verify_samples
            << " violations=" << rep.total_violations();
        for (const auto& r : rep.records)
            out << ' ' << to_string(r.name) << '=' << r.violations;
        out << '\n';
    }
    return rep.total_violations() == 0 ? kExitOk : kExitRuntime;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Distribution-dependent jump SPDE solver and large-deviation diagnostics"};
    app.name(args.empty() ? "mvldp" : fs::path(args.front()).filename().string());
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(version_string()));

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    bool quiet = false;
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"simulate", "McKean-Vlasov ensemble via Picard iteration on the law flow"},
        {"limit", "noise-free limit path"},
        {"skeleton", "skeleton path for the configured control"},
        {"controlled", "stochastic controlled ensemble under the simulated law"},
        {"rate", "minimize the control cost over the rare event"},
        {"ldp", "Monte Carlo rare-event table and rate comparison"},
        {"particles", "interacting particle system"},
        {"verify", "sampled check of the structural hypotheses"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "config file")->required();
        sub->add_option("--seed", seed, "base seed (overrides [seed])");
        sub->add_option("--out", out_dir, "output directory (overrides [output])");
        sub->add_flag("--quiet", quiet, "suppress the summary line");
    }

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    if (argv.empty()) argv.push_back("mvldp");
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << version_string() << '\n';
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n' << app.help();
        return kExitValidation;
    }

    Invocation inv;
    inv.command = app.get_subcommands().front()->get_name();
    inv.quiet = quiet;
    try {
        inv.config = load_config(config_path);
        if (seed) inv.config.base_seed = *seed;
        if (!out_dir.empty()) inv.config.output.directory = out_dir;
        inv.out_dir = inv.config.output.directory;
        inv.config_dir = fs::path(config_path).parent_path();
        if (inv.config_dir.empty()) inv.config_dir = ".";
        const DiscretizedTriple triple(inv.config.model);

        if (inv.command == "simulate" || inv.command == "particles") return cmd_ensemble(inv, triple, out);
        if (inv.command == "limit") return cmd_limit(inv, triple, out);
        if (inv.command == "skeleton") return cmd_skeleton(inv, triple, out);
        if (inv.command == "controlled") return cmd_controlled(inv, triple, out);
        if (inv.command == "rate") return cmd_rate(inv, triple, out);
        if (inv.command == "ldp") return cmd_ldp(inv, triple, out);
        return cmd_verify(inv, triple, out);
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const BlowUpError& e) {
        err << "runtime failure: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const NonConvergenceError& e) {
        err << "runtime failure: " << e.what() << "\nresidual history:";
        for (const auto& w : e.residual_history()) {
            err << "\n ";
            for (double r : w) err << ' ' << format_double(r);
        }
        err << '\n';
        return kExitRuntime;
    } catch (const std::exception& e) {
        err << "runtime failure: " << e.what() << '\n';
        return kExitRuntime;
    }
}

}  // namespace mvldp
