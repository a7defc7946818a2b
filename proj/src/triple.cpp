#include "mvldp/triple.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <boost/math/tools/minima.hpp>

#include "mvldp/errors.hpp"
#include "mvldp/rng.hpp"

namespace mvldp {

namespace {

constexpr double kRoundoff = 1e-9;

double signed_power(double u, double exponent_minus_one) {
    return std::copysign(std::pow(std::abs(u), exponent_minus_one), u);
}

double conjugate(double p) { return p / (p - 1.0); }

// Forward differences of the interior values with zero Dirichlet data:
// q_j = (x_{j+1} - x_j) / h for j = 0..n, x_0 = x_{n+1} = 0.
void discrete_gradient(ConstVecRef x, double h, Eigen::VectorXd& q) {
    const auto n = x.size();
    q.resize(n + 1);
    double prev = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        q[j] = (x[j] - prev) / h;
        prev = x[j];
    }
    q[n] = -prev / h;
}

// sup over ‖v‖_{W^{1,p}_0} ≤ 1 of wᵀv.  With Dᵀs = w the supremum over the
// range of D equals h^{-1/p} min_c ‖s + c·1‖_{p'}, a 1-D convex problem
// because ker Dᵀ = span(1).
double sobolev_dual_norm(const Eigen::VectorXd& w, double h, double p) {
    const auto n = w.size();
    Eigen::VectorXd s(n + 1);
    s[0] = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) s[i + 1] = s[i] - h * w[i];
    const double pc = conjugate(p);
    auto objective = [&](double c) {
        double acc = 0.0;
        for (Eigen::Index j = 0; j <= n; ++j) acc += std::pow(std::abs(s[j] + c), pc);
        return acc;
    };
    double c_best;
    if (std::abs(pc - 2.0) < 1e-14) {
        c_best = -s.mean();
    } else {
        const double lo = -s.maxCoeff();
        const double hi = -s.minCoeff();
        if (hi - lo <= 0.0) {
            c_best = lo;
        } else {
            c_best = boost::math::tools::brent_find_minima(objective, lo, hi,
                                                           std::numeric_limits<double>::digits)
                         .first;
        }
    }
    return std::pow(h, -1.0 / p) * std::pow(objective(c_best), 1.0 / pc);
}

StateVector broadcast_initial(const ModelConfig& cfg) {
    StateVector x(static_cast<Eigen::Index>(cfg.n));
    if (cfg.initial.size() == 1) {
        x.setConstant(cfg.initial.front());
    } else if (cfg.initial.size() == cfg.n) {
        for (std::size_t i = 0; i < cfg.n; ++i) x[static_cast<Eigen::Index>(i)] = cfg.initial[i];
    } else {
        throw ValidationError("model.initial: expected 1 or " + std::to_string(cfg.n) +
                              " values, got " + std::to_string(cfg.initial.size()));
    }
    if (!x.allFinite()) throw ValidationError("model.initial: values must be finite");
    return x;
}

void validate_config(const ModelConfig& cfg) {
    if (cfg.n == 0) throw ValidationError("model.n: must be a positive integer");
    if (!(cfg.T > 0.0) || !std::isfinite(cfg.T)) throw ValidationError("model.T: must be positive");
    if (is_pde(cfg.kind) && !(cfg.exponent >= 2.0)) {
        throw ValidationError(std::string("model.exponent: ") +
                              (cfg.kind == ModelKind::p_laplace ? "p" : "r") +
                              " must satisfy exponent >= 2 for " +
                              std::string(to_string(cfg.kind)));
    }
    if (cfg.h < 0.0) throw ValidationError("model.h: mesh must be positive");
    if (cfg.marks.points.empty()) throw ValidationError("model.marks: mark space is empty");
    if (cfg.marks.points.size() != cfg.marks.weights.size())
        throw ValidationError("model.weights: need one weight per mark point");
    for (double th : cfg.marks.weights)
        if (!(th > 0.0) || !std::isfinite(th))
            throw ValidationError("model.weights: every mark weight must be positive and finite");
    for (double z : cfg.marks.points)
        if (!std::isfinite(z)) throw ValidationError("model.marks: mark points must be finite");
    if (!std::isfinite(cfg.sigma) || !std::isfinite(cfg.kappa) || !std::isfinite(cfg.a))
        throw ValidationError("model: sigma, kappa and a must be finite");
    for (auto env : {cfg.envelope_l1, cfg.envelope_l2})
        if (env && !(*env >= 0.0)) throw ValidationError("model.l1/l2: envelopes must be nonnegative");
    if (cfg.coercivity_override && !(*cfg.coercivity_override > 0.0))
        throw ValidationError("model.coercivity_override: must be positive");
}

HypothesisConstants derive_constants(const ModelConfig& cfg) {
    HypothesisConstants k;
    const double a = cfg.a;
    const double ak = std::abs(cfg.kappa);
    const double nd = static_cast<double>(cfg.n);
    switch (cfg.kind) {
        case ModelKind::linear_sde:
            k.alpha = 2.0;
            k.delta = a > 0.0 ? a : 1.0;
            k.c_coercive = std::max(ak, ak - 2.0 * a + k.delta);
            k.c_mono = std::max(ak, ak - 2.0 * a);
            k.c_growth = 2.0 * std::max(a * a, cfg.kappa * cfg.kappa);
            break;
        case ModelKind::mv_sde:
            // interaction ∫tanh(y - x) μ(dy) is bounded by √n and 1-Lipschitz in (x, W₂)
            k.alpha = 2.0;
            k.delta = a > 0.0 ? a : 1.0;
            k.c_coercive = std::max({ak * nd, ak - 2.0 * a + k.delta, 0.0});
            k.c_mono = std::max(ak, 3.0 * ak - 2.0 * a);
            k.c_growth = 2.0 * std::max(a * a, cfg.kappa * cfg.kappa * nd);
            break;
        case ModelKind::p_laplace: {
            const double pc = conjugate(cfg.exponent);
            k.alpha = cfg.exponent;
            k.delta = 1.0;
            k.c_coercive = std::max(ak, ak - 2.0 * cfg.kappa);
            k.c_mono = std::max(ak, ak - 2.0 * cfg.kappa);
            k.c_growth = std::pow(3.0, pc - 1.0) * (1.0 + 2.0 * std::pow(ak, pc));
            break;
        }
        case ModelKind::porous_media:
            // ⟨A(x), x⟩ = -‖x‖_V^r and ‖A(x)‖_{V*}^{r'} = ‖x‖_V^r exactly
            k.alpha = cfg.exponent;
            k.delta = 1.0;
            k.c_coercive = 0.0;
            k.c_mono = 0.0;
            k.c_growth = 1.0;
            break;
    }
    if (cfg.coercivity_override) k.delta = *cfg.coercivity_override;
    return k;
}

}  // namespace

std::string_view to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::linear_sde: return "linear_sde";
        case ModelKind::mv_sde: return "mv_sde";
        case ModelKind::p_laplace: return "p_laplace";
        case ModelKind::porous_media: return "porous_media";
    }
    return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
    for (auto k : {ModelKind::linear_sde, ModelKind::mv_sde, ModelKind::p_laplace,
                   ModelKind::porous_media})
        if (to_string(k) == name) return k;
    throw ValidationError("unknown model kind '" + std::string(name) +
                          "' (expected linear_sde, mv_sde, p_laplace or porous_media)");
}

double MarkSpace::total_mass() const {
    double acc = 0.0;
    for (double w : weights) acc += w;
    return acc;
}

double MarkSpace::max_abs_point() const {
    double m = 0.0;
    for (double z : points) m = std::max(m, std::abs(z));
    return m;
}

double HypothesisConstants::combined_c() const {
    return std::max({c_coercive, c_mono, c_growth});
}

DiscretizedTriple::DiscretizedTriple(ModelConfig config) : config_(std::move(config)) {
    validate_config(config_);
    const auto n = static_cast<Eigen::Index>(config_.n);
    if (is_pde(config_.kind)) {
        const double expected = 1.0 / static_cast<double>(config_.n + 1);
        if (config_.h == 0.0) {
            config_.h = expected;
        } else if (std::abs(config_.h * static_cast<double>(config_.n + 1) - 1.0) > 1e-12) {
            throw ValidationError("model.h: mesh must satisfy h*(n+1) = 1 on (0,1)");
        }
        mesh_ = config_.h;
        const double inv_h2 = 1.0 / (mesh_ * mesh_);
        laplacian_ = Eigen::MatrixXd::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            laplacian_(i, i) = 2.0 * inv_h2;
            if (i > 0) laplacian_(i, i - 1) = -inv_h2;
            if (i + 1 < n) laplacian_(i, i + 1) = -inv_h2;
        }
        if (config_.kind == ModelKind::porous_media) {
            // H = (W_0^{1,2})*: ⟨u, v⟩_H = h uᵀ L⁻¹ v
            gram_ = mesh_ * laplacian_.ldlt().solve(Eigen::MatrixXd::Identity(n, n));
            gram_ = 0.5 * (gram_ + gram_.transpose());
        } else {
            gram_ = mesh_ * Eigen::MatrixXd::Identity(n, n);
        }
    } else {
        mesh_ = 1.0;
        gram_ = Eigen::MatrixXd::Identity(n, n);
        gram_identity_ = true;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(gram_);
    if (llt.info() != Eigen::Success) throw ValidationError("h_gram is not positive definite");
    gram_factor_ = llt.matrixU();

    constants_ = derive_constants(config_);
    initial_ = broadcast_initial(config_);

    profile_.resize(n);
    if (is_pde(config_.kind)) {
        for (Eigen::Index i = 0; i < n; ++i)
            profile_[i] = std::sin(std::numbers::pi * static_cast<double>(i + 1) * mesh_);
    } else {
        profile_.setOnes();
    }
    profile_ /= std::sqrt(profile_.dot(gram_ * profile_));

    const double zmax = config_.marks.max_abs_point();
    const double sig = std::abs(config_.sigma);
    if (config_.kind == ModelKind::linear_sde) {
        l1_ = config_.envelope_l1.value_or(0.0);
        l2_ = config_.envelope_l2.value_or(sig * zmax);
    } else {
        l1_ = config_.envelope_l1.value_or(0.25 * sig * zmax * std::max(1.0, std::abs(config_.kappa)));
        l2_ = config_.envelope_l2.value_or(1.5 * sig * zmax);
    }
}

std::string DiscretizedTriple::v_norm_description() const {
    switch (config_.kind) {
        case ModelKind::porous_media: return "discrete L^" + std::to_string(config_.exponent);
        case ModelKind::p_laplace: return "discrete W0^{1," + std::to_string(config_.exponent) + "}";
        default: return "Euclidean";
    }
}

DiscretizedTriple make_triple(const ModelConfig& config) { return DiscretizedTriple(config); }

void drift_A(const DiscretizedTriple& triple, double /*t*/, ConstVecRef x,
             const EmpiricalMeasure& mu, VecRef out) {
    const auto& cfg = triple.config();
    const auto n = x.size();
    switch (cfg.kind) {
        case ModelKind::linear_sde:
            out = -cfg.a * x + cfg.kappa * mu.mean();
            break;
        case ModelKind::mv_sde: {
            out = -cfg.a * x;
            if (cfg.kappa != 0.0) {
                for (std::size_t k = 0; k < mu.size(); ++k) {
                    const double w = cfg.kappa * mu.weight(k);
                    const auto y = mu.atom(k);
                    for (Eigen::Index i = 0; i < n; ++i) out[i] += w * std::tanh(y[i] - x[i]);
                }
            }
            break;
        }
        case ModelKind::p_laplace: {
            const double h = triple.mesh();
            const double pm1 = cfg.exponent - 1.0;
            // -Dᵀ φ(Dx) with φ(q) = |q|^{p-2} q
            double phi_prev = signed_power(x[0] / h, pm1);
            for (Eigen::Index i = 0; i < n; ++i) {
                const double right = (i + 1 < n ? x[i + 1] : 0.0) - x[i];
                const double phi_next = signed_power(right / h, pm1);
                out[i] = (phi_next - phi_prev) / h;
                phi_prev = phi_next;
            }
            out += cfg.kappa * (mu.mean() - x);
            break;
        }
        case ModelKind::porous_media: {
            const double rm1 = cfg.exponent - 1.0;
            Eigen::VectorXd psi(n);
            for (Eigen::Index i = 0; i < n; ++i) psi[i] = signed_power(x[i], rm1);
            // Δ_h Ψ(x) = -L Ψ(x), tridiagonal
            const double inv_h2 = 1.0 / (triple.mesh() * triple.mesh());
            for (Eigen::Index i = 0; i < n; ++i) {
                const double left = i > 0 ? psi[i - 1] : 0.0;
                const double right = i + 1 < n ? psi[i + 1] : 0.0;
                out[i] = (left - 2.0 * psi[i] + right) * inv_h2;
            }
            break;
        }
    }
}

StateVector drift_A(const DiscretizedTriple& triple, double t, ConstVecRef x,
                    const EmpiricalMeasure& mu) {
    StateVector out(x.size());
    drift_A(triple, t, x, mu, out);
    return out;
}

double jump_amplitude(const DiscretizedTriple& triple, ConstVecRef x, const EmpiricalMeasure& mu) {
    const auto& cfg = triple.config();
    if (cfg.kind == ModelKind::linear_sde) return 1.0;
    const double xh = norm(triple, Space::H, x);
    const double mh = norm(triple, Space::H, mu.mean());
    return 1.0 + 0.25 * std::tanh(xh) + 0.25 * std::tanh(cfg.kappa * mh);
}

StateVector jump_f(const DiscretizedTriple& triple, double /*t*/, ConstVecRef x,
                   const EmpiricalMeasure& mu, std::size_t mark_index) {
    const auto& marks = triple.config().marks;
    if (mark_index >= marks.size())
        throw ValidationError("jump_f: mark index " + std::to_string(mark_index) + " out of range");
    const double scale = triple.config().sigma * marks.points[mark_index];
    if (scale == 0.0) return StateVector::Zero(x.size());
    return scale * jump_amplitude(triple, x, mu) * triple.jump_profile();
}

StateVector jump_f_at(const DiscretizedTriple& triple, double t, ConstVecRef x,
                      const EmpiricalMeasure& mu, double z) {
    const auto& pts = triple.config().marks.points;
    for (std::size_t j = 0; j < pts.size(); ++j)
        if (pts[j] == z) return jump_f(triple, t, x, mu, j);
    throw ValidationError("jump_f: mark value " + std::to_string(z) + " is not in the mark space");
}

double pairing(const DiscretizedTriple& triple, ConstVecRef a_star, ConstVecRef v) {
    const auto n = static_cast<Eigen::Index>(triple.dim());
    if (a_star.size() != n || v.size() != n)
        throw ValidationError("pairing: dimension mismatch");
    if (triple.gram_is_identity()) return a_star.dot(v);
    if (triple.kind() == ModelKind::p_laplace) return triple.mesh() * a_star.dot(v);
    return a_star.dot(triple.h_gram() * v);
}

double norm(const DiscretizedTriple& triple, Space space, ConstVecRef x) {
    const auto& cfg = triple.config();
    if (triple.gram_is_identity()) return x.norm();
    const double h = triple.mesh();
    switch (space) {
        case Space::H:
            if (cfg.kind == ModelKind::p_laplace) return std::sqrt(h) * x.norm();
            return std::sqrt(std::max(0.0, x.dot(triple.h_gram() * x)));
        case Space::V: {
            const double p = cfg.exponent;
            double acc = 0.0;
            if (cfg.kind == ModelKind::porous_media) {
                for (Eigen::Index i = 0; i < x.size(); ++i) acc += std::pow(std::abs(x[i]), p);
            } else {
                Eigen::VectorXd q;
                discrete_gradient(x, h, q);
                for (Eigen::Index j = 0; j < q.size(); ++j) acc += std::pow(std::abs(q[j]), p);
            }
            return std::pow(h * acc, 1.0 / p);
        }
        case Space::V_star: {
            const double p = cfg.exponent;
            Eigen::VectorXd w = cfg.kind == ModelKind::p_laplace ? Eigen::VectorXd(h * x)
                                                                 : Eigen::VectorXd(triple.h_gram() * x);
            if (cfg.kind == ModelKind::porous_media) {
                const double pc = conjugate(p);
                double acc = 0.0;
                for (Eigen::Index i = 0; i < w.size(); ++i) acc += std::pow(std::abs(w[i]), pc);
                return std::pow(h, -1.0 / p) * std::pow(acc, 1.0 / pc);
            }
            return sobolev_dual_norm(w, h, p);
        }
    }
    return 0.0;
}

// ---------------------------------------------------------------------------

std::string_view to_string(Hypothesis h) {
    switch (h) {
        case Hypothesis::continuity: return "H1_continuity";
        case Hypothesis::coercivity: return "H2_coercivity";
        case Hypothesis::monotonicity: return "H3_monotonicity";
        case Hypothesis::growth: return "H4_growth";
        case Hypothesis::jump_lipschitz: return "H5i_jump_lipschitz";
        case Hypothesis::jump_growth: return "H5ii_jump_growth";
    }
    return "unknown";
}

namespace {

// rhs - lhs with a relative round-off allowance, normalized to O(1).
double slack(double lhs, double rhs) {
    const double scale = std::abs(lhs) + std::abs(rhs);
    return (rhs - lhs + kRoundoff * scale) / (1.0 + scale);
}

EmpiricalMeasure shifted(const EmpiricalMeasure& mu, ConstVecRef d, double step) {
    std::vector<double> atoms(mu.atoms().begin(), mu.atoms().end());
    const std::size_t n = mu.dim();
    for (std::size_t k = 0; k < mu.size(); ++k)
        for (std::size_t i = 0; i < n; ++i) atoms[k * n + i] += step * d[static_cast<Eigen::Index>(i)];
    return {n, std::move(atoms), std::vector<double>(mu.weights().begin(), mu.weights().end())};
}

}  // namespace

double hypothesis_margin(const DiscretizedTriple& triple, Hypothesis h,
                         const HypothesisSample& s) {
    const auto& k = triple.constants();
    const double t = s.t;
    switch (h) {
        case Hypothesis::continuity: {
            const StateVector base_drift = drift_A(triple, t, s.x, s.mu);
            const double base = pairing(triple, base_drift, s.y);
            const StateVector xs = s.x + kContinuityStep * s.direction;
            const double moved_x = pairing(triple, drift_A(triple, t, xs, s.mu), s.y);
            const double moved_mu =
                pairing(triple, drift_A(triple, t, s.x, shifted(s.mu, s.direction, kContinuityStep)), s.y);
            const double jump = std::max(std::abs(moved_x - base), std::abs(moved_mu - base));
            // measured against the Cauchy-Schwarz scale of the pairing, not |base|,
            // which can cancel to near zero while the drift itself is large
            const double scale = norm(triple, Space::H, base_drift) * norm(triple, Space::H, s.y);
            const double rel = jump / (scale + 1.0);
            return kContinuityThreshold - rel;
        }
        case Hypothesis::coercivity: {
            const double lhs = 2.0 * pairing(triple, drift_A(triple, t, s.x, s.mu), s.x);
            const double xh = norm(triple, Space::H, s.x);
            const double rhs = k.c_coercive * (xh * xh + second_moment(triple, s.mu) + 1.0) -
                               k.delta * std::pow(norm(triple, Space::V, s.x), k.alpha);
            return slack(lhs, rhs);
        }
        case Hypothesis::monotonicity: {
            const StateVector diff = drift_A(triple, t, s.x, s.mu) - drift_A(triple, t, s.y, s.nu);
            const StateVector dx = s.x - s.y;
            const double lhs = 2.0 * pairing(triple, diff, dx);
            const double dh = norm(triple, Space::H, dx);
            const double w = wasserstein2(triple, s.mu, s.nu);
            const double rhs = k.c_mono * dh * dh + k.c_mono * w * w;
            return slack(lhs, rhs);
        }
        case Hypothesis::growth: {
            const double a_norm = norm(triple, Space::V_star, drift_A(triple, t, s.x, s.mu));
            const double lhs = std::pow(a_norm, k.alpha / (k.alpha - 1.0));
            const double rhs = k.c_growth * (std::pow(norm(triple, Space::V, s.x), k.alpha) +
                                             second_moment(triple, s.mu) + 1.0);
            return slack(lhs, rhs);
        }
        case Hypothesis::jump_lipschitz: {
            const double dh = norm(triple, Space::H, StateVector(s.x - s.y));
            const double w = wasserstein2(triple, s.mu, s.nu);
            double worst = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < triple.config().marks.size(); ++j) {
                const StateVector df = jump_f(triple, t, s.x, s.mu, j) - jump_f(triple, t, s.y, s.nu, j);
                worst = std::min(worst, slack(norm(triple, Space::H, df), triple.envelope_l1() * (dh + w)));
            }
            return worst;
        }
        case Hypothesis::jump_growth: {
            const double rhs = triple.envelope_l2() * (norm(triple, Space::H, s.x) +
                                                       std::sqrt(second_moment(triple, s.mu)) + 1.0);
            double worst = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < triple.config().marks.size(); ++j)
                worst = std::min(worst, slack(norm(triple, Space::H, jump_f(triple, t, s.x, s.mu, j)), rhs));
            return worst;
        }
    }
    return 0.0;
}

std::size_t HypothesisReport::total_violations() const {
    std::size_t v = 0;
    for (const auto& r : records) v += r.violations;
    return v;
}

namespace {

StateVector random_state(Rng& rng, std::size_t n, double scale) {
    std::normal_distribution<double> normal(0.0, 1.0);
    StateVector x(static_cast<Eigen::Index>(n));
    for (auto& v : x) v = scale * normal(rng);
    return x;
}

EmpiricalMeasure random_measure(Rng& rng, std::size_t n, double scale) {
    std::uniform_int_distribution<int> count(1, 4);
    std::exponential_distribution<double> expo(1.0);
    const auto m = static_cast<std::size_t>(count(rng));
    std::vector<double> atoms;
    std::vector<double> weights(m);
    double total = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const StateVector a = random_state(rng, n, scale);
        atoms.insert(atoms.end(), a.begin(), a.end());
        weights[k] = expo(rng) + 1e-3;
        total += weights[k];
    }
    for (auto& w : weights) w /= total;
    return {n, std::move(atoms), std::move(weights)};
}

}  // namespace

HypothesisReport check_hypotheses(const DiscretizedTriple& triple, std::size_t sample_budget,
                                  std::uint64_t seed) {
    if (sample_budget < 1) throw ValidationError("check_hypotheses: sample_budget must be >= 1");
    const std::vector<Hypothesis> all = {Hypothesis::continuity,    Hypothesis::coercivity,
                                         Hypothesis::monotonicity,  Hypothesis::growth,
                                         Hypothesis::jump_lipschitz, Hypothesis::jump_growth};
    HypothesisReport report;
    for (auto h : all) report.records.push_back({h, 0, 0, std::numeric_limits<double>::infinity(), {}});

    Rng rng(derive_seed(seed, 0, StreamSalt::hypothesis));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t n = triple.dim();
    for (std::size_t i = 0; i < sample_budget; ++i) {
        const double scale = std::pow(10.0, -2.0 + 4.0 * unit(rng));
        HypothesisSample s{unit(rng) * triple.horizon(),
                           random_state(rng, n, scale),
                           StateVector(),
                           random_measure(rng, n, scale),
                           random_measure(rng, n, scale),
                           random_state(rng, n, 1.0)};
        // half of the pairs are near-diagonal
        s.y = unit(rng) < 0.5 ? random_state(rng, n, scale)
                              : StateVector(s.x + random_state(rng, n, 1e-3 * scale));
        for (auto& rec : report.records) {
            const double m = hypothesis_margin(triple, rec.name, s);
            ++rec.samples_tested;
            if (m < 0.0) {
                ++rec.violations;
                if (!rec.witness || m < rec.worst_margin) rec.witness = s;
            }
            rec.worst_margin = std::min(rec.worst_margin, m);
        }
    }
    return report;
}

}  // namespace mvldp
