#include "mvldp/prm.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include <boost/math/tools/roots.hpp>

#include "mvldp/errors.hpp"
#include "mvldp/io.hpp"
#include "mvldp/rng.hpp"

namespace mvldp {

Control Control::constant(double T, std::size_t cells, std::size_t marks, double value) {
    if (cells == 0) throw ValidationError("control: need at least one time cell");
    if (!(T > 0.0)) throw ValidationError("control: horizon must be positive");
    Control c;
    c.time_cells.resize(cells + 1);
    for (std::size_t i = 0; i <= cells; ++i)
        c.time_cells[i] = T * static_cast<double>(i) / static_cast<double>(cells);
    c.time_cells.back() = T;
    c.values = ControlMatrix::Constant(static_cast<Eigen::Index>(cells),
                                         static_cast<Eigen::Index>(marks), value);
    c.validate(marks);
    return c;
}

void Control::validate(std::size_t mark_count) const {
    if (time_cells.size() < 2) throw ValidationError("control: need at least one time cell");
    if (time_cells.front() != 0.0) throw ValidationError("control: time cells must start at 0");
    for (std::size_t i = 1; i < time_cells.size(); ++i)
        if (!(time_cells[i] > time_cells[i - 1]))
            throw ValidationError("control: time breakpoints must be strictly increasing");
    if (cells() != time_cells.size() - 1)
        throw ValidationError("control: expected " + std::to_string(time_cells.size() - 1) +
                              " rows of values, got " + std::to_string(cells()));
    if (marks() != mark_count)
        throw ValidationError("control: expected " + std::to_string(mark_count) +
                              " mark columns, got " + std::to_string(marks()));
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        const double v = values.data()[i];
        if (!(v >= 0.0) || !std::isfinite(v))
            throw ValidationError("control: values must be finite and nonnegative");
    }
}

std::size_t Control::cell_at(double t) const {
    const auto it = std::lower_bound(time_cells.begin() + 1, time_cells.end(), t);
    const auto idx = static_cast<std::size_t>(it - time_cells.begin()) - 1;
    return std::min(idx, cells() - 1);
}

double entropy_l(double r) {
    if (!(r >= 0.0)) throw ValidationError("entropy_l: argument must be nonnegative");
    if (r == 0.0) return 1.0;
    return r * std::log(r) - r + 1.0;
}

double control_cost_Q(const Control& control, const MarkSpace& marks) {
    control.validate(marks.size());
    double q = 0.0;
    for (std::size_t c = 0; c < control.cells(); ++c) {
        const double dt = control.time_cells[c + 1] - control.time_cells[c];
        for (std::size_t j = 0; j < marks.size(); ++j)
            q += entropy_l(control.values(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(j))) *
                 marks.weights[j] * dt;
    }
    return q;
}

JumpStream sample_prm(const MarkSpace& marks, const Control& control, double intensity_scale,
                      std::uint64_t seed) {
    if (!(intensity_scale > 0.0) || !std::isfinite(intensity_scale))
        throw ValidationError("sample_prm: intensity scale must be positive");
    control.validate(marks.size());
    JumpStream stream;
    stream.intensity_scale = intensity_scale;
    Rng rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t c = 0; c < control.cells(); ++c) {
        const double lo = control.time_cells[c];
        const double hi = control.time_cells[c + 1];
        for (std::size_t j = 0; j < marks.size(); ++j) {
            const double g = control.values(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(j));
            const double mean = intensity_scale * g * marks.weights[j] * (hi - lo);
            if (mean <= 0.0) continue;
            std::poisson_distribution<long long> count(mean);
            const long long events = count(rng);
            for (long long e = 0; e < events; ++e) stream.events.push_back({hi - (hi - lo) * unit(rng), j});
        }
    }
    // stable sort keeps insertion order among exact ties after the mark key
    std::stable_sort(stream.events.begin(), stream.events.end(),
                     [](const JumpEvent& a, const JumpEvent& b) {
                         return a.t < b.t || (a.t == b.t && a.mark < b.mark);
                     });
    return stream;
}

void compensator_drift(const DiscretizedTriple& triple, double /*t*/, ConstVecRef x,
                       const EmpiricalMeasure& mu, std::span<const double> control_row, VecRef out) {
    const auto& marks = triple.config().marks;
    if (control_row.size() != marks.size())
        throw ValidationError("compensator_drift: control row has " +
                              std::to_string(control_row.size()) + " entries, expected " +
                              std::to_string(marks.size()));
    // f(·, z_j) = σ·z_j·s(x, μ)·e for every model, so the sum collapses to
    // one scalar times the profile.
    double weight = 0.0;
    for (std::size_t j = 0; j < marks.size(); ++j)
        weight += marks.points[j] * (control_row[j] - 1.0) * marks.weights[j];
    if (weight == 0.0 || triple.config().sigma == 0.0) {
        out.setZero();
        return;
    }
    out = (triple.config().sigma * weight * jump_amplitude(triple, x, mu)) * triple.jump_profile();
}

StateVector compensator_drift(const DiscretizedTriple& triple, double t, ConstVecRef x,
                              const EmpiricalMeasure& mu, std::span<const double> control_row) {
    StateVector out(x.size());
    compensator_drift(triple, t, x, mu, control_row, out);
    return out;
}

double entropy_upper_inverse(double level) {
    if (!(level >= 0.0)) throw ValidationError("entropy_upper_inverse: level must be nonnegative");
    if (level == 0.0) return 0.0;
    // l is increasing on [1, ∞) and l(1 + s) ≥ s²/(2(1+s)), so the root lies
    // below 2·level + 2·sqrt(level) + 1.
    auto f = [level](double s) { return entropy_l(1.0 + s) - level; };
    double hi = 2.0 * level + 2.0 * std::sqrt(level) + 1.0;
    boost::math::tools::eps_tolerance<double> tol(52);
    std::uintmax_t iters = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(f, 0.0, hi, f(0.0), f(hi), tol, iters);
    return 0.5 * (a + b);
}

double deviation_bound(double chi, double N, double mass) {
    if (chi < 0.0 || N < 0.0 || !(mass > 0.0))
        throw ValidationError("deviation_bound: need chi ≥ 0, N ≥ 0, mass > 0");
    // By concavity of the upper inverse the extremal control is constant,
    // and upward deviations dominate downward ones of equal cost.
    return chi * mass * entropy_upper_inverse(N / mass);
}

void write_jump_stream_csv(std::ostream& os, const JumpStream& stream, const MarkSpace& marks) {
    os << "t,mark_index,z_value\n";
    for (const auto& e : stream.events)
        os << format_double(e.t) << ',' << e.mark << ',' << format_double(marks.points[e.mark]) << '\n';
}

}  // namespace mvldp
