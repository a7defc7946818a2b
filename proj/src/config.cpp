#include "mvldp/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "mvldp/errors.hpp"
#include "mvldp/io.hpp"

namespace mvldp {

namespace {

struct Entry {
    std::string value;
    std::size_t line;
};

using Section = std::map<std::string, Entry>;

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> keys = {
        {"model",
         {"kind", "n", "h", "T", "exponent", "kappa", "a", "marks", "weights", "sigma", "l1", "l2",
          "initial", "coercivity_override"}},
        {"discretization",
         {"K_steps", "picard_tol", "picard_window", "max_outer", "replicas", "unsafe_explicit"}},
        {"noise", {"eps", "eps_list"}},
        {"control", {"cells", "values", "file"}},
        {"ldp", {"event", "threshold", "direction", "description", "budget", "g_max", "tolerance", "starts"}},
        {"output", {"directory", "formats"}},
        {"seed", {"base_seed"}},
        {"verify", {"samples"}},
    };
    return keys;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
    throw ValidationError("line " + std::to_string(line) + ": " + what);
}

class Reader {
public:
    explicit Reader(std::map<std::string, Section> sections) : sections_(std::move(sections)) {}

    const Entry* find(const std::string& sec, const std::string& key) const {
        const auto s = sections_.find(sec);
        if (s == sections_.end()) return nullptr;
        const auto k = s->second.find(key);
        return k == s->second.end() ? nullptr : &k->second;
    }

    std::string where(const std::string& sec, const std::string& key) const {
        const Entry* e = find(sec, key);
        return (e ? "line " + std::to_string(e->line) + ": " : std::string()) + sec + "." + key;
    }

    void real(const std::string& sec, const std::string& key, double& out) const {
        if (const Entry* e = find(sec, key)) out = parse_double(e->value, where(sec, key));
    }
    void real(const std::string& sec, const std::string& key, std::optional<double>& out) const {
        if (const Entry* e = find(sec, key)) out = parse_double(e->value, where(sec, key));
    }
    template <class Int>
    void integer(const std::string& sec, const std::string& key, Int& out) const {
        const Entry* e = find(sec, key);
        if (!e) return;
        Int v{};
        const auto& s = e->value;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
            throw ValidationError(where(sec, key) + ": expected a nonnegative integer, got '" + s + "'");
        out = v;
    }
    void boolean(const std::string& sec, const std::string& key, bool& out) const {
        const Entry* e = find(sec, key);
        if (!e) return;
        if (e->value == "true" || e->value == "1" || e->value == "yes") {
            out = true;
        } else if (e->value == "false" || e->value == "0" || e->value == "no") {
            out = false;
        } else {
            throw ValidationError(where(sec, key) + ": expected true or false, got '" + e->value + "'");
        }
    }
    void text(const std::string& sec, const std::string& key, std::string& out) const {
        if (const Entry* e = find(sec, key)) out = e->value;
    }
    std::vector<std::string> words(const std::string& sec, const std::string& key) const {
        std::vector<std::string> out;
        const Entry* e = find(sec, key);
        if (!e) return out;
        for (const auto& cell : split_csv_line(e->value)) {
            auto w = trim(cell);
            if (w.empty()) throw ValidationError(where(sec, key) + ": empty list element");
            out.push_back(std::move(w));
        }
        return out;
    }
    void reals(const std::string& sec, const std::string& key, std::vector<double>& out) const {
        if (!find(sec, key)) return;
        out.clear();
        for (const auto& w : words(sec, key)) out.push_back(parse_double(w, where(sec, key)));
    }

private:
    std::map<std::string, Section> sections_;
};

std::map<std::string, Section> tokenize(std::string_view text) {
    std::map<std::string, Section> sections;
    std::string current;
    std::size_t lineno = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string_view view = raw;
        if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        const std::string line = trim(view);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(lineno, "malformed section header '" + line + "'");
            current = trim(std::string_view(line).substr(1, line.size() - 2));
            if (!schema().count(current)) fail(lineno, "unknown section [" + current + "]");
            sections[current];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(lineno, "expected key = value, got '" + line + "'");
        if (current.empty()) fail(lineno, "key outside of any [section]");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (!schema().at(current).count(key)) fail(lineno, "[" + current + "] unknown key '" + key + "'");
        if (value.empty()) fail(lineno, current + "." + key + ": missing value");
        if (!sections[current].emplace(key, Entry{value, lineno}).second)
            fail(lineno, current + "." + key + ": duplicate key");
    }
    return sections;
}

void require(bool ok, const Reader& r, const std::string& sec, const std::string& key,
             const std::string& what) {
    if (!ok) throw ValidationError(r.where(sec, key) + ": " + what);
}

std::string join(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_double(v[i]);
    return out;
}

std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + v[i];
    return out;
}

std::string_view event_name(EventKind k) {
    return k == EventKind::terminal_threshold ? "terminal" : "sup_deviation";
}

}  // namespace

RunConfig parse_config(std::string_view text) {
    const Reader r(tokenize(text));
    RunConfig c;

    auto& m = c.model;
    if (const Entry* e = r.find("model", "kind")) {
        try {
            m.kind = parse_model_kind(e->value);
        } catch (const ValidationError& err) {
            throw ValidationError(r.where("model", "kind") + ": " + err.what());
        }
    }
    r.integer("model", "n", m.n);
    r.real("model", "h", m.h);
    if (r.find("model", "h")) require(m.h > 0.0, r, "model", "h", "mesh must be positive");
    r.real("model", "T", m.T);
    r.real("model", "exponent", m.exponent);
    r.real("model", "kappa", m.kappa);
    r.real("model", "a", m.a);
    r.reals("model", "marks", m.marks.points);
    r.reals("model", "weights", m.marks.weights);
    r.real("model", "sigma", m.sigma);
    r.real("model", "l1", m.envelope_l1);
    r.real("model", "l2", m.envelope_l2);
    r.reals("model", "initial", m.initial);
    r.real("model", "coercivity_override", m.coercivity_override);
    try {
        (void)DiscretizedTriple(m);
    } catch (const ValidationError& err) {
        // messages start with "model.<key>:"; point at that key's line
        const std::string msg = err.what();
        const auto dot = msg.find('.');
        const auto colon = msg.find(':');
        if (msg.rfind("model.", 0) == 0 && colon != std::string::npos && dot < colon) {
            const Entry* e = r.find("model", msg.substr(dot + 1, colon - dot - 1));
            if (e) throw ValidationError("line " + std::to_string(e->line) + ": " + msg);
        }
        throw ValidationError("[model] " + msg);
    }

    auto& d = c.discretization;
    r.integer("discretization", "K_steps", d.K_steps);
    require(d.K_steps >= 1, r, "discretization", "K_steps", "must be at least 1");
    r.real("discretization", "picard_tol", d.picard_tol);
    require(d.picard_tol > 0.0, r, "discretization", "picard_tol", "must be positive");
    r.real("discretization", "picard_window", d.picard_window);
    require(d.picard_window >= 0.0, r, "discretization", "picard_window",
            "must be nonnegative (0 selects the default)");
    r.integer("discretization", "max_outer", d.max_outer);
    require(d.max_outer >= 1, r, "discretization", "max_outer", "must be at least 1");
    r.integer("discretization", "replicas", d.replicas);
    require(d.replicas >= 1, r, "discretization", "replicas", "must be at least 1");
    r.boolean("discretization", "unsafe_explicit", d.unsafe_explicit);

    r.real("noise", "eps", c.noise.eps);
    require(c.noise.eps > 0.0 && std::isfinite(c.noise.eps), r, "noise", "eps", "must be positive");
    r.reals("noise", "eps_list", c.noise.eps_list);
    for (double e : c.noise.eps_list) require(e > 0.0, r, "noise", "eps_list", "every value must be positive");

    r.integer("control", "cells", c.control.cells);
    require(c.control.cells >= 1, r, "control", "cells", "must be at least 1");
    r.reals("control", "values", c.control.values);
    r.text("control", "file", c.control.file);
    require(c.control.values.empty() || c.control.file.empty(), r, "control", "file",
            "give either values or file, not both");
    if (!c.control.values.empty()) {
        require(c.control.values.size() == c.control.cells * m.marks.size(), r, "control", "values",
                "expected cells × marks = " + std::to_string(c.control.cells * m.marks.size()) + " values");
        for (double v : c.control.values)
            require(v >= 0.0 && std::isfinite(v), r, "control", "values", "values must be nonnegative");
    }

    auto& l = c.ldp;
    if (const Entry* e = r.find("ldp", "event")) {
        if (e->value == "terminal") {
            l.event.kind = EventKind::terminal_threshold;
        } else if (e->value == "sup_deviation") {
            l.event.kind = EventKind::sup_deviation;
        } else {
            throw ValidationError(r.where("ldp", "event") + ": expected terminal or sup_deviation");
        }
    }
    r.real("ldp", "threshold", l.event.threshold);
    r.reals("ldp", "direction", l.event.direction);
    require(l.event.direction.empty() || l.event.direction.size() == m.n, r, "ldp", "direction",
            "expected " + std::to_string(m.n) + " values");
    r.text("ldp", "description", l.event.description);
    r.integer("ldp", "budget", l.budget);
    require(l.budget >= 1, r, "ldp", "budget", "must be at least 1");
    r.real("ldp", "g_max", l.g_max);
    require(l.g_max > 1.0, r, "ldp", "g_max", "must exceed 1");
    r.real("ldp", "tolerance", l.tolerance);
    require(l.tolerance >= 0.0, r, "ldp", "tolerance", "must be nonnegative");
    r.integer("ldp", "starts", l.starts);
    require(l.starts >= 1, r, "ldp", "starts", "must be at least 1");

    r.text("output", "directory", c.output.directory);
    if (r.find("output", "formats")) {
        c.output.formats = r.words("output", "formats");
        for (const auto& f : c.output.formats)
            require(f == "csv" || f == "json", r, "output", "formats", "unknown format '" + f + "'");
    }

    r.integer("seed", "base_seed", c.base_seed);
    r.integer("verify", "samples", c.verify_samples);
    require(c.verify_samples >= 1, r, "verify", "samples", "must be at least 1");
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string emit_config(const RunConfig& c) {
    std::ostringstream o;
    const auto& m = c.model;
    o << "[model]\n";
    o << "kind = " << to_string(m.kind) << '\n';
    o << "n = " << m.n << '\n';
    if (m.h != 0.0) o << "h = " << format_double(m.h) << '\n';
    o << "T = " << format_double(m.T) << '\n';
    o << "exponent = " << format_double(m.exponent) << '\n';
    o << "kappa = " << format_double(m.kappa) << '\n';
    o << "a = " << format_double(m.a) << '\n';
    o << "marks = " << join(m.marks.points) << '\n';
    o << "weights = " << join(m.marks.weights) << '\n';
    o << "sigma = " << format_double(m.sigma) << '\n';
    if (m.envelope_l1) o << "l1 = " << format_double(*m.envelope_l1) << '\n';
    if (m.envelope_l2) o << "l2 = " << format_double(*m.envelope_l2) << '\n';
    o << "initial = " << join(m.initial) << '\n';
    if (m.coercivity_override) o << "coercivity_override = " << format_double(*m.coercivity_override) << '\n';

    const auto& d = c.discretization;
    o << "\n[discretization]\n";
    o << "K_steps = " << d.K_steps << '\n';
    o << "picard_tol = " << format_double(d.picard_tol) << '\n';
    o << "picard_window = " << format_double(d.picard_window) << '\n';
    o << "max_outer = " << d.max_outer << '\n';
    o << "replicas = " << d.replicas << '\n';
    o << "unsafe_explicit = " << (d.unsafe_explicit ? "true" : "false") << '\n';

    o << "\n[noise]\n";
    o << "eps = " << format_double(c.noise.eps) << '\n';
    o << "eps_list = " << join(c.noise.eps_list) << '\n';

    o << "\n[control]\n";
    o << "cells = " << c.control.cells << '\n';
    if (!c.control.values.empty()) o << "values = " << join(c.control.values) << '\n';
    if (!c.control.file.empty()) o << "file = " << c.control.file << '\n';

    const auto& l = c.ldp;
    o << "\n[ldp]\n";
    o << "event = " << event_name(l.event.kind) << '\n';
    o << "threshold = " << format_double(l.event.threshold) << '\n';
    if (!l.event.direction.empty()) o << "direction = " << join(l.event.direction) << '\n';
    if (!l.event.description.empty()) o << "description = " << l.event.description << '\n';
    o << "budget = " << l.budget << '\n';
    o << "g_max = " << format_double(l.g_max) << '\n';
    o << "tolerance = " << format_double(l.tolerance) << '\n';
    o << "starts = " << l.starts << '\n';

    o << "\n[output]\n";
    o << "directory = " << c.output.directory << '\n';
    o << "formats = " << join(c.output.formats) << '\n';

    o << "\n[seed]\n";
    o << "base_seed = " << c.base_seed << '\n';

    o << "\n[verify]\n";
    o << "samples = " << c.verify_samples << '\n';
    return o.str();
}

SolverOptions RunConfig::solver_options() const {
    SolverOptions o;
    o.K_steps = discretization.K_steps;
    o.unsafe_explicit = discretization.unsafe_explicit;
    o.max_outer = discretization.max_outer;
    o.window = discretization.picard_window;
    return o;
}

RateOptions RunConfig::rate_options() const {
    RateOptions o;
    o.time_cells = control.cells;
    o.K_steps = discretization.K_steps;
    o.g_max = ldp.g_max;
    o.tolerance = ldp.tolerance;
    o.starts = ldp.starts;
    return o;
}

bool RunConfig::wants(std::string_view format) const {
    return std::find(output.formats.begin(), output.formats.end(), format) != output.formats.end();
}

nlohmann::json config_to_json(const RunConfig& c, const DiscretizedTriple& triple) {
    using nlohmann::json;
    const auto& m = triple.config();
    const auto& k = triple.constants();
    json model = {
        {"kind", std::string(to_string(m.kind))},
        {"n", m.n},
        {"h", triple.mesh()},
        {"T", m.T},
        {"exponent", m.exponent},
        {"kappa", m.kappa},
        {"a", m.a},
        {"marks", m.marks.points},
        {"weights", m.marks.weights},
        {"sigma", m.sigma},
        {"l1", triple.envelope_l1()},
        {"l2", triple.envelope_l2()},
        {"initial", std::vector<double>(triple.initial_state().begin(), triple.initial_state().end())},
        {"alpha", k.alpha},
        {"delta", k.delta},
        {"c_coercive", k.c_coercive},
        {"c_mono", k.c_mono},
        {"c_growth", k.c_growth},
        {"v_norm", triple.v_norm_description()},
    };
    const auto& d = c.discretization;
    json control = {{"cells", c.control.cells}, {"values", c.control.values}, {"file", c.control.file}};
    const auto& l = c.ldp;
    return {
        {"model", model},
        {"discretization",
         {{"K_steps", d.K_steps},
          {"picard_tol", d.picard_tol},
          {"picard_window", d.picard_window > 0.0 ? std::min(d.picard_window, m.T) : default_window(triple)},
          {"max_outer", d.max_outer},
          {"replicas", d.replicas},
          {"unsafe_explicit", d.unsafe_explicit}}},
        {"noise", {{"eps", c.noise.eps}, {"eps_list", c.noise.eps_list}}},
        {"control", control},
        {"ldp",
         {{"event", std::string(event_name(l.event.kind))},
          {"threshold", l.event.threshold},
          {"direction", l.event.direction},
          {"description", l.event.description},
          {"budget", l.budget},
          {"g_max", l.g_max},
          {"tolerance", l.tolerance},
          {"starts", l.starts}}},
        {"output", {{"directory", c.output.directory}, {"formats", c.output.formats}}},
        {"seed", {{"base_seed", c.base_seed}}},
        {"verify", {{"samples", c.verify_samples}}},
    };
}

Control build_control(const RunConfig& c, const std::string& base_dir) {
    const auto& marks = c.model.marks;
    if (!c.control.file.empty()) {
        std::filesystem::path file = c.control.file;
        if (file.is_relative()) file = std::filesystem::path(base_dir) / file;
        std::ifstream in(file);
        if (!in) throw ValidationError("control.file: cannot read '" + file.string() + "'");
        std::string line;
        std::getline(in, line);
        const auto header = split_csv_line(line);
        if (header.size() != marks.size() + 2 || trim(header[0]) != "t_start")
            throw ValidationError("control.file: header must be t_start,t_end,g_0,...,g_" +
                                  std::to_string(marks.size() - 1));
        Control ctl;
        std::vector<double> values;
        std::size_t lineno = 1;
        while (std::getline(in, line)) {
            ++lineno;
            if (trim(line).empty()) continue;
            const auto cells = split_csv_line(line);
            const std::string where = "control.file line " + std::to_string(lineno);
            if (cells.size() != header.size()) throw ValidationError(where + ": wrong column count");
            const double t0 = parse_double(cells[0], where);
            const double t1 = parse_double(cells[1], where);
            if (ctl.time_cells.empty()) {
                ctl.time_cells.push_back(t0);
            } else if (t0 != ctl.time_cells.back()) {
                throw ValidationError(where + ": cells must be contiguous");
            }
            ctl.time_cells.push_back(t1);
            for (std::size_t j = 2; j < cells.size(); ++j) values.push_back(parse_double(cells[j], where));
        }
        if (ctl.time_cells.size() < 2) throw ValidationError("control.file: no cells");
        ctl.values = Eigen::Map<const ControlMatrix>(values.data(),
                                                     static_cast<Eigen::Index>(ctl.time_cells.size() - 1),
                                                     static_cast<Eigen::Index>(marks.size()));
        ctl.validate(marks.size());
        return ctl;
    }
    Control ctl = Control::constant(c.model.T, c.control.cells, marks.size(), 1.0);
    if (!c.control.values.empty())
        ctl.values = Eigen::Map<const ControlMatrix>(c.control.values.data(),
                                                     static_cast<Eigen::Index>(c.control.cells),
                                                     static_cast<Eigen::Index>(marks.size()));
    ctl.validate(marks.size());
    return ctl;
}

}  // namespace mvldp
