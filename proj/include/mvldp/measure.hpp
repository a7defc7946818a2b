#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "mvldp/state.hpp"

namespace mvldp {

class DiscretizedTriple;

/// Weighted atom cloud in discrete H: an element of P₂(H) with finite support.
/// Atoms are stored row-major (atom i occupies [i*dim, (i+1)*dim)).
class EmpiricalMeasure {
public:
    EmpiricalMeasure(std::size_t dim, std::vector<double> atoms, std::vector<double> weights);

    static EmpiricalMeasure dirac(ConstVecRef x);
    static EmpiricalMeasure uniform(std::size_t dim, std::vector<double> atoms);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return weights_.size(); }

    Eigen::Map<const Eigen::VectorXd> atom(std::size_t i) const {
        return {atoms_.data() + i * dim_, static_cast<Eigen::Index>(dim_)};
    }
    double weight(std::size_t i) const { return weights_[i]; }
    std::span<const double> atoms() const noexcept { return atoms_; }
    std::span<const double> weights() const noexcept { return weights_; }

    /// Barycenter Σ wᵢ ξᵢ, computed once at construction.
    const StateVector& mean() const noexcept { return mean_; }

private:
    std::size_t dim_;
    std::vector<double> atoms_;
    std::vector<double> weights_;
    StateVector mean_;
};

/// Time-indexed sequence of measures, one per grid node.
struct MeasureFlow {
    std::vector<double> time_grid;
    std::vector<EmpiricalMeasure> measures;

    /// Throws ValidationError unless the grid is strictly increasing from 0
    /// and holds exactly one measure per node.
    void validate() const;
    std::size_t size() const noexcept { return measures.size(); }

    /// Constant-in-time flow δ_x on the given grid.
    static MeasureFlow constant(std::vector<double> grid, const EmpiricalMeasure& mu);
};

/// Distance result with the method that produced it.
struct W2Result {
    double distance = 0.0;
    bool exact = true;  ///< false when the sliced approximation was used
};

inline constexpr std::size_t kExactTransportAtomLimit = 64;
inline constexpr std::size_t kSlicedProjections = 128;

/// L²-Wasserstein distance under ‖·‖_H.  Exact for scalar H (quantile
/// coupling) and for supports of at most 64 atoms (min-cost-flow LP);
/// above that a 128-direction sliced estimate is returned and flagged.
W2Result wasserstein2_detail(const DiscretizedTriple& triple, const EmpiricalMeasure& mu,
                             const EmpiricalMeasure& nu);
double wasserstein2(const DiscretizedTriple& triple, const EmpiricalMeasure& mu,
                    const EmpiricalMeasure& nu);

double second_moment(const DiscretizedTriple& triple, const EmpiricalMeasure& mu);
StateVector mean_element(const DiscretizedTriple& triple, const EmpiricalMeasure& mu);

/// sup over grid nodes r of e^{-λ r} W₂(flowA(r), flowB(r)).
double flow_distance(const DiscretizedTriple& triple, const MeasureFlow& a, const MeasureFlow& b,
                     double lambda);

/// CSV with header `weight,coord_0,...,coord_{n-1}`.
void write_measure_csv(std::ostream& os, const EmpiricalMeasure& mu);
EmpiricalMeasure read_measure_csv(std::istream& is);

}  // namespace mvldp
