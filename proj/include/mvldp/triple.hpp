#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mvldp/measure.hpp"
#include "mvldp/state.hpp"

namespace mvldp {

enum class ModelKind { linear_sde, mv_sde, p_laplace, porous_media };

std::string_view to_string(ModelKind kind);
/// Throws ValidationError for an unknown name.
ModelKind parse_model_kind(std::string_view name);

inline bool is_pde(ModelKind kind) {
    return kind == ModelKind::p_laplace || kind == ModelKind::porous_media;
}

/// Finite mark space Z = {z_j} with intensity weights θ_j > 0.
struct MarkSpace {
    std::vector<double> points;
    std::vector<double> weights;

    std::size_t size() const noexcept { return points.size(); }
    double total_mass() const;
    double max_abs_point() const;

    bool operator==(const MarkSpace&) const = default;
};

struct ModelConfig {
    ModelKind kind = ModelKind::linear_sde;
    std::size_t n = 1;          ///< grid points (PDE) or SDE dimension
    double h = 0.0;             ///< mesh; 0 means 1/(n+1) for PDE models
    double T = 1.0;
    double exponent = 2.0;      ///< p for p-Laplace, r for porous media
    double kappa = 0.0;         ///< mean-field strength
    double a = 1.0;             ///< linear decay rate (SDE models)
    MarkSpace marks{{1.0}, {1.0}};
    double sigma = 0.5;         ///< jump scale
    std::optional<double> envelope_l1;  ///< defaults to the Lipschitz constant of f
    std::optional<double> envelope_l2;  ///< defaults to the growth constant of f
    std::vector<double> initial{1.0};   ///< x; a single value is broadcast
    std::optional<double> coercivity_override;  ///< replaces δ (negative controls)

    bool operator==(const ModelConfig&) const = default;
};

/// Constants of the structural hypotheses, derived per model in closed form.
struct HypothesisConstants {
    double alpha = 2.0;       ///< coercivity exponent
    double delta = 1.0;       ///< coercivity constant
    double c_coercive = 0.0;  ///< c in the coercivity inequality
    double c_mono = 0.0;      ///< c in the monotonicity inequality
    double c_growth = 0.0;    ///< c in the growth inequality

    /// Single constant valid for all three inequalities.
    double combined_c() const;
};

enum class Space { H, V, V_star };

/// Finite-dimensional realization of V ⊂ H ⊂ V*, the model operators and
/// their constants.  Immutable after construction.
class DiscretizedTriple {
public:
    explicit DiscretizedTriple(ModelConfig config);

    const ModelConfig& config() const noexcept { return config_; }
    ModelKind kind() const noexcept { return config_.kind; }
    std::size_t dim() const noexcept { return config_.n; }
    double mesh() const noexcept { return mesh_; }
    double horizon() const noexcept { return config_.T; }

    const Eigen::MatrixXd& h_gram() const noexcept { return gram_; }
    bool gram_is_identity() const noexcept { return gram_identity_; }
    /// Upper-triangular R with h_gram = RᵀR, so ‖x‖_H = |R x|.
    const Eigen::MatrixXd& gram_factor() const noexcept { return gram_factor_; }
    /// Discrete Dirichlet Laplacian tridiag(-1,2,-1)/h² (PDE models).
    const Eigen::MatrixXd& dirichlet_laplacian() const noexcept { return laplacian_; }

    const HypothesisConstants& constants() const noexcept { return constants_; }
    double alpha() const noexcept { return constants_.alpha; }
    double delta() const noexcept { return constants_.delta; }
    double c_mono() const noexcept { return constants_.c_mono; }

    double envelope_l1() const noexcept { return l1_; }
    double envelope_l2() const noexcept { return l2_; }

    const StateVector& initial_state() const noexcept { return initial_; }
    /// Unit-H spatial profile carried by every jump.
    const StateVector& jump_profile() const noexcept { return profile_; }

    /// Describes ‖·‖_V in words, e.g. "discrete L^3".
    std::string v_norm_description() const;

private:
    ModelConfig config_;
    double mesh_ = 1.0;
    Eigen::MatrixXd gram_;
    Eigen::MatrixXd gram_factor_;
    Eigen::MatrixXd laplacian_;
    bool gram_identity_ = false;
    HypothesisConstants constants_;
    double l1_ = 0.0;
    double l2_ = 0.0;
    StateVector initial_;
    StateVector profile_;
};

DiscretizedTriple make_triple(const ModelConfig& config);

/// Drift A(t, x, μ) as its discrete V* representative.
void drift_A(const DiscretizedTriple& triple, double t, ConstVecRef x, const EmpiricalMeasure& mu,
             VecRef out);
StateVector drift_A(const DiscretizedTriple& triple, double t, ConstVecRef x,
                    const EmpiricalMeasure& mu);

/// Scalar factor s(x, μ) of the jump coefficient f(t,x,μ,z) = σ·z·s(x,μ)·e,
/// with e the unit jump profile.  s ≡ 1 for linear_sde.
double jump_amplitude(const DiscretizedTriple& triple, ConstVecRef x, const EmpiricalMeasure& mu);

/// f(t, x, μ, z_j) for mark index j.
StateVector jump_f(const DiscretizedTriple& triple, double t, ConstVecRef x,
                   const EmpiricalMeasure& mu, std::size_t mark_index);
/// f(t, x, μ, z) for a mark value; throws ValidationError if z is not a support point.
StateVector jump_f_at(const DiscretizedTriple& triple, double t, ConstVecRef x,
                      const EmpiricalMeasure& mu, double z);

/// Duality pairing ⟨a*, v⟩ realized through the Gram matrix.
double pairing(const DiscretizedTriple& triple, ConstVecRef a_star, ConstVecRef v);

double norm(const DiscretizedTriple& triple, Space space, ConstVecRef x);

// ---------------------------------------------------------------------------
// Sampled verification of the structural hypotheses.

enum class Hypothesis { continuity, coercivity, monotonicity, growth, jump_lipschitz, jump_growth };
std::string_view to_string(Hypothesis h);

/// One random input tuple.  `direction` is the perturbation used by the
/// continuity check.
struct HypothesisSample {
    double t = 0.0;
    StateVector x;
    StateVector y;
    EmpiricalMeasure mu;
    EmpiricalMeasure nu;
    StateVector direction;
};

/// Normalized slack of one inequality at one sample.  Negative means the
/// inequality fails beyond floating-point round-off.
double hypothesis_margin(const DiscretizedTriple& triple, Hypothesis h,
                         const HypothesisSample& sample);

struct HypothesisRecord {
    Hypothesis name;
    std::size_t samples_tested = 0;
    std::size_t violations = 0;
    double worst_margin = 0.0;
    std::optional<HypothesisSample> witness;
};

struct HypothesisReport {
    std::vector<HypothesisRecord> records;

    std::size_t total_violations() const;
};

inline constexpr double kContinuityStep = 1e-6;
inline constexpr double kContinuityThreshold = 1e-3;

HypothesisReport check_hypotheses(const DiscretizedTriple& triple, std::size_t sample_budget,
                                  std::uint64_t seed);

}  // namespace mvldp
