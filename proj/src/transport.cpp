// L²-Wasserstein distance between finitely supported measures.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "mvldp/errors.hpp"
#include "mvldp/measure.hpp"
#include "mvldp/rng.hpp"
#include "mvldp/triple.hpp"

namespace mvldp {

namespace {

constexpr double kMassEps = 1e-15;

struct WeightedPoint {
    double value;
    double weight;
    std::size_t index;
};

// Quantile coupling on the common refinement of the two CDFs.  Ties are
// ordered by atom index so the result is deterministic.
double quantile_w2_sq(std::vector<WeightedPoint> a, std::vector<WeightedPoint> b) {
    auto by_value = [](const WeightedPoint& p, const WeightedPoint& q) {
        return p.value < q.value || (p.value == q.value && p.index < q.index);
    };
    std::sort(a.begin(), a.end(), by_value);
    std::sort(b.begin(), b.end(), by_value);
    std::size_t i = 0;
    std::size_t j = 0;
    double ra = a[0].weight;
    double rb = b[0].weight;
    double cost = 0.0;
    while (i < a.size() && j < b.size()) {
        const double m = std::min(ra, rb);
        const double d = a[i].value - b[j].value;
        cost += m * d * d;
        ra -= m;
        rb -= m;
        if (ra <= kMassEps) {
            if (++i < a.size()) ra = a[i].weight;
        }
        if (rb <= kMassEps) {
            if (++j < b.size()) rb = b[j].weight;
        }
    }
    return cost;
}

// Exact transportation problem by successive shortest paths with Johnson
// potentials.  Edges left→right have infinite capacity; reverse residual
// edges carry the current flow.
double exact_w2_sq(const Eigen::MatrixXd& xa, std::span<const double> wa, const Eigen::MatrixXd& xb,
                   std::span<const double> wb) {
    const std::size_t m = wa.size();
    const std::size_t k = wb.size();
    Eigen::MatrixXd cost(m, k);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < k; ++j)
            cost(i, j) = (xa.col(i) - xb.col(j)).squaredNorm();

    Eigen::MatrixXd flow = Eigen::MatrixXd::Zero(m, k);
    std::vector<double> supply(wa.begin(), wa.end());
    std::vector<double> demand(wb.begin(), wb.end());
    const double sa = std::accumulate(supply.begin(), supply.end(), 0.0);
    const double sb = std::accumulate(demand.begin(), demand.end(), 0.0);
    for (auto& d : demand) d *= sa / sb;

    const std::size_t nodes = m + k;
    std::vector<double> pot(nodes, 0.0);
    std::vector<double> dist(nodes);
    std::vector<std::size_t> prev(nodes);
    std::vector<std::size_t> origin(nodes);
    std::vector<char> done(nodes);
    constexpr double inf = std::numeric_limits<double>::infinity();
    constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
    const double tol = 1e-14;

    for (std::size_t guard = 0; guard < 4 * nodes * nodes + 16; ++guard) {
        bool any_supply = false;
        for (std::size_t i = 0; i < m; ++i) any_supply |= supply[i] > tol;
        if (!any_supply) break;

        std::fill(dist.begin(), dist.end(), inf);
        std::fill(prev.begin(), prev.end(), none);
        std::fill(done.begin(), done.end(), 0);
        for (std::size_t i = 0; i < m; ++i) {
            if (supply[i] > tol) {
                dist[i] = 0.0;
                origin[i] = i;
            }
        }
        // dense Dijkstra on reduced costs
        std::size_t target = none;
        for (;;) {
            std::size_t u = none;
            for (std::size_t v = 0; v < nodes; ++v)
                if (!done[v] && dist[v] < inf && (u == none || dist[v] < dist[u])) u = v;
            if (u == none) break;
            done[u] = 1;
            if (u >= m && demand[u - m] > tol) {
                target = u;
                break;
            }
            if (u < m) {
                for (std::size_t j = 0; j < k; ++j) {
                    const std::size_t v = m + j;
                    const double nd = dist[u] + std::max(0.0, cost(u, j) + pot[u] - pot[v]);
                    if (!done[v] && nd < dist[v]) {
                        dist[v] = nd;
                        prev[v] = u;
                        origin[v] = origin[u];
                    }
                }
            } else {
                const std::size_t j = u - m;
                for (std::size_t i = 0; i < m; ++i) {
                    if (flow(i, j) <= tol) continue;
                    const double nd = dist[u] + std::max(0.0, -cost(i, j) + pot[u] - pot[i]);
                    if (!done[i] && nd < dist[i]) {
                        dist[i] = nd;
                        prev[i] = u;
                        origin[i] = origin[u];
                    }
                }
            }
        }
        if (target == none) break;

        const double dt = dist[target];
        for (std::size_t v = 0; v < nodes; ++v) pot[v] += std::min(dist[v], dt);

        double amount = std::min(supply[origin[target]], demand[target - m]);
        for (std::size_t v = target; prev[v] != none; v = prev[v]) {
            const std::size_t u = prev[v];
            if (u >= m) amount = std::min(amount, flow(v, u - m));  // reverse edge right→left
        }
        for (std::size_t v = target; prev[v] != none; v = prev[v]) {
            const std::size_t u = prev[v];
            if (u < m) {
                flow(u, v - m) += amount;
            } else {
                flow(v, u - m) -= amount;
            }
        }
        supply[origin[target]] -= amount;
        demand[target - m] -= amount;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < k; ++j) total += flow(i, j) * cost(i, j);
    return total;
}

// Atoms mapped by the Gram factor, so ‖·‖_H becomes Euclidean.
Eigen::MatrixXd whitened_atoms(const DiscretizedTriple& triple, const EmpiricalMeasure& mu) {
    const auto n = static_cast<Eigen::Index>(mu.dim());
    Eigen::Map<const Eigen::MatrixXd> raw(mu.atoms().data(), n, static_cast<Eigen::Index>(mu.size()));
    if (triple.gram_is_identity()) return raw;
    return triple.gram_factor() * raw;
}

}  // namespace

W2Result wasserstein2_detail(const DiscretizedTriple& triple, const EmpiricalMeasure& mu,
                             const EmpiricalMeasure& nu) {
    if (mu.dim() != nu.dim() || mu.dim() != triple.dim())
        throw ValidationError("wasserstein2: dimension mismatch");
    const Eigen::MatrixXd xa = whitened_atoms(triple, mu);
    const Eigen::MatrixXd xb = whitened_atoms(triple, nu);

    auto project = [](const Eigen::MatrixXd& x, std::span<const double> w, const Eigen::VectorXd& dir) {
        std::vector<WeightedPoint> pts(w.size());
        for (std::size_t i = 0; i < w.size(); ++i)
            pts[i] = {dir.dot(x.col(static_cast<Eigen::Index>(i))), w[i], i};
        return pts;
    };

    if (mu.dim() == 1) {
        const Eigen::VectorXd e = Eigen::VectorXd::Ones(1);
        const double c = quantile_w2_sq(project(xa, mu.weights(), e), project(xb, nu.weights(), e));
        return {std::sqrt(std::max(0.0, c)), true};
    }
    if (mu.size() <= kExactTransportAtomLimit && nu.size() <= kExactTransportAtomLimit) {
        const double c = exact_w2_sq(xa, mu.weights(), xb, nu.weights());
        return {std::sqrt(std::max(0.0, c)), true};
    }
    // Sliced estimate with fixed directions; scaled by n so that it is exact
    // for translations.
    Rng rng(derive_seed(0, mu.dim(), StreamSalt::projection));
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd dir(static_cast<Eigen::Index>(mu.dim()));
    double acc = 0.0;
    for (std::size_t p = 0; p < kSlicedProjections; ++p) {
        for (auto& v : dir) v = normal(rng);
        dir.normalize();
        acc += quantile_w2_sq(project(xa, mu.weights(), dir), project(xb, nu.weights(), dir));
    }
    const double sw2 = acc / static_cast<double>(kSlicedProjections);
    return {std::sqrt(std::max(0.0, static_cast<double>(mu.dim()) * sw2)), false};
}

double wasserstein2(const DiscretizedTriple& triple, const EmpiricalMeasure& mu,
                    const EmpiricalMeasure& nu) {
    return wasserstein2_detail(triple, mu, nu).distance;
}

}  // namespace mvldp
