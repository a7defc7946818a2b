#include "mvldp/measure.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "mvldp/errors.hpp"
#include "mvldp/io.hpp"
#include "mvldp/triple.hpp"

namespace mvldp {

EmpiricalMeasure::EmpiricalMeasure(std::size_t dim, std::vector<double> atoms,
                                   std::vector<double> weights)
    : dim_(dim), atoms_(std::move(atoms)), weights_(std::move(weights)) {
    if (dim_ == 0) throw ValidationError("measure: dimension must be positive");
    if (weights_.empty()) throw ValidationError("measure: empty measure");
    if (atoms_.size() != dim_ * weights_.size())
        throw ValidationError("measure: atom storage does not match dim × count");
    // compensated sum so that 1/m repeated m times passes for large m
    double total = 0.0;
    double carry = 0.0;
    for (double w : weights_) {
        if (!(w > 0.0) || !std::isfinite(w)) throw ValidationError("measure: weights must be positive");
        const double y = w - carry;
        const double t = total + y;
        carry = (t - total) - y;
        total = t;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw ValidationError("measure: weights sum to " + format_double(total) + ", expected 1");
    for (double a : atoms_)
        if (!std::isfinite(a)) throw ValidationError("measure: atoms must be finite");
    mean_ = StateVector::Zero(static_cast<Eigen::Index>(dim_));
    for (std::size_t i = 0; i < weights_.size(); ++i) mean_ += weights_[i] * atom(i);
}

EmpiricalMeasure EmpiricalMeasure::dirac(ConstVecRef x) {
    return {static_cast<std::size_t>(x.size()), std::vector<double>(x.begin(), x.end()), {1.0}};
}

EmpiricalMeasure EmpiricalMeasure::uniform(std::size_t dim, std::vector<double> atoms) {
    if (dim == 0 || atoms.empty() || atoms.size() % dim != 0)
        throw ValidationError("measure: atom storage does not match dim × count");
    const std::size_t m = atoms.size() / dim;
    return {dim, std::move(atoms), std::vector<double>(m, 1.0 / static_cast<double>(m))};
}

void MeasureFlow::validate() const {
    if (time_grid.empty() || time_grid.size() != measures.size())
        throw ValidationError("measure flow: need one measure per grid node");
    if (time_grid.front() != 0.0) throw ValidationError("measure flow: grid must start at 0");
    for (std::size_t k = 1; k < time_grid.size(); ++k)
        if (!(time_grid[k] > time_grid[k - 1]))
            throw ValidationError("measure flow: grid must be strictly increasing");
}

MeasureFlow MeasureFlow::constant(std::vector<double> grid, const EmpiricalMeasure& mu) {
    MeasureFlow flow;
    flow.measures.assign(grid.size(), mu);
    flow.time_grid = std::move(grid);
    return flow;
}

double second_moment(const DiscretizedTriple& triple, const EmpiricalMeasure& mu) {
    double acc = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const double r = norm(triple, Space::H, mu.atom(i));
        acc += mu.weight(i) * r * r;
    }
    return acc;
}

StateVector mean_element(const DiscretizedTriple& /*triple*/, const EmpiricalMeasure& mu) {
    return mu.mean();
}

double flow_distance(const DiscretizedTriple& triple, const MeasureFlow& a, const MeasureFlow& b,
                     double lambda) {
    if (lambda < 0.0) throw ValidationError("flow_distance: lambda must be nonnegative");
    if (a.time_grid != b.time_grid || a.size() != b.size())
        throw ValidationError("flow_distance: time grids differ");
    double best = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = std::exp(-lambda * a.time_grid[k]) *
                         wasserstein2(triple, a.measures[k], b.measures[k]);
        best = std::max(best, d);
    }
    return best;
}

void write_measure_csv(std::ostream& os, const EmpiricalMeasure& mu) {
    os << "weight";
    for (std::size_t i = 0; i < mu.dim(); ++i) os << ",coord_" << i;
    os << '\n';
    for (std::size_t k = 0; k < mu.size(); ++k) {
        os << format_double(mu.weight(k));
        const auto a = mu.atom(k);
        for (Eigen::Index i = 0; i < a.size(); ++i) os << ',' << format_double(a[i]);
        os << '\n';
    }
}

EmpiricalMeasure read_measure_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ValidationError("measure csv: missing header");
    const auto header = split_csv_line(line);
    if (header.size() < 2 || header[0] != "weight")
        throw ValidationError("measure csv: header must be weight,coord_0,...");
    const std::size_t dim = header.size() - 1;
    std::vector<double> atoms;
    std::vector<double> weights;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != dim + 1)
            throw ValidationError("measure csv line " + std::to_string(lineno) + ": expected " +
                                  std::to_string(dim + 1) + " columns");
        weights.push_back(parse_double(cells[0], "measure csv line " + std::to_string(lineno)));
        for (std::size_t i = 1; i <= dim; ++i)
            atoms.push_back(parse_double(cells[i], "measure csv line " + std::to_string(lineno)));
    }
    return {dim, std::move(atoms), std::move(weights)};
}

}  // namespace mvldp
