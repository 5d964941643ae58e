#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hjlab/barrier.hpp"
#include "hjlab/lattice.hpp"
#include "hjlab/model.hpp"

namespace hjlab {

/// alpha sampled at the grid nodes.
inline std::vector<double> alpha_on_grid(const AlphaProfile& alpha, const Grid& grid) {
    std::vector<double> a(static_cast<std::size_t>(grid.N));
    for (int i = 0; i < grid.N; ++i) a[i] = alpha.eval(grid.x(i));
    return a;
}

namespace detail {

/// Per-edge tables of the discounted Bellman operator in k-major layout, so a
/// sweep is 2K+1 contiguous passes over the nodes.
struct DiscountedTables {
    int N = 0;
    int K = 0;
    std::vector<double> factor;  // [kk * N + i] = exp(-lambda dt abar(j,i)), j = i-k
    std::vector<double> cost;    // [kk * N + i] = cost(j, k)

    DiscountedTables(const CostKernel& ker, const std::vector<double>& alpha, double lambda)
        : N(ker.grid.N), K(ker.K) {
        factor.resize(static_cast<std::size_t>(2 * K + 1) * N);
        cost.resize(factor.size());
        for (int k = -K; k <= K; ++k) {
            std::size_t row = static_cast<std::size_t>(k + K) * N;
            for (int i = 0; i < N; ++i) {
                int j = (i - k) % N;
                if (j < 0) j += N;
                double abar = 0.5 * (alpha[j] + alpha[i]);
                factor[row + i] = std::exp(-lambda * ker.dt * abar);
                cost[row + i] = ker.at(j, k);
            }
        }
    }

    /// One discounted sweep; out must not alias u.
    void sweep(const std::vector<double>& u, std::vector<double>& out) const {
        std::fill(out.begin(), out.end(), kOffBand);
        for (int k = -K; k <= K; ++k) {
            std::size_t row = static_cast<std::size_t>(k + K) * N;
            const double* fac = factor.data() + row;
            const double* cst = cost.data() + row;
            // j = i - k, split at the wrap boundary to keep loads contiguous
            auto run = [&](int ilo, int ihi, int joff) {
                for (int i = ilo; i < ihi; ++i) {
                    double cand = fac[i] * (u[i + joff] + cst[i]);
                    if (cand < out[i]) out[i] = cand;
                }
            };
            if (k >= 0) {
                run(0, k, N - k);
                run(k, N, -k);
            } else {
                run(0, N + k, -k);
                run(N + k, N, -k - N);
            }
        }
    }

    /// Deterministic argmin step per node: smallest k wins ties.
    std::vector<int> policy(const std::vector<double>& u) const {
        std::vector<int> pol(static_cast<std::size_t>(N), 0);
        std::vector<double> best(static_cast<std::size_t>(N), kOffBand);
        for (int k = -K; k <= K; ++k) {
            std::size_t row = static_cast<std::size_t>(k + K) * N;
            for (int i = 0; i < N; ++i) {
                int j = (i - k) % N;
                if (j < 0) j += N;
                double cand = factor[row + i] * (u[j] + cost[row + i]);
                if (cand < best[i]) {
                    best[i] = cand;
                    pol[i] = k;
                }
            }
        }
        return pol;
    }
};

}  // namespace detail

/// One application of the discounted Bellman operator
///   (T u)(i) = min_k exp(-lambda dt abar(j,i)) (u(j) + cost(j,k)), j = i-k,
/// with abar the mean of the endpoint alpha values. Monotone, nonexpansive,
/// and a strict contraction on steps where abar > 0.
inline std::vector<double> discounted_step(const CostKernel& kernel_c,
                                           const std::vector<double>& alpha_nodes, double lambda,
                                           const std::vector<double>& u) {
    detail::DiscountedTables tab(kernel_c, alpha_nodes, lambda);
    std::vector<double> out(u.size());
    tab.sweep(u, out);
    return out;
}

inline std::vector<double> discounted_step(const CostKernel& kernel_c, const AlphaProfile& alpha,
                                           double lambda, const std::vector<double>& u) {
    return discounted_step(kernel_c, alpha_on_grid(alpha, kernel_c.grid), lambda, u);
}

struct DiscountedSolution {
    std::vector<double> u;
    double lambda = 0.0;
    std::vector<double> alpha_nodes;
    std::vector<int> policy;
    long iterations = 0;
    double residual = 0.0;
};

class AlphaVanishesOnAubry : public std::runtime_error {
  public:
    AlphaVanishesOnAubry() : std::runtime_error("alpha vanishes on Aubry set") {}
};

class SolveDiverged : public std::runtime_error {
  public:
    explicit SolveDiverged(const std::string& msg) : std::runtime_error(msg) {}
};

/// Value iteration for the discounted fixed point. The positivity of alpha on
/// the detected Aubry nodes is a hard precondition; without it the equation
/// loses uniqueness and the iteration has nothing to converge to.
inline DiscountedSolution solve_discounted(const CostKernel& kernel_c, const AlphaProfile& alpha,
                                           double lambda, const std::vector<int>& aubry,
                                           double tol_fp = 1e-10, long max_iter = 1'000'000,
                                           std::optional<std::vector<double>> warm_start = {}) {
    if (!(lambda > 0.0)) throw std::invalid_argument("solve_discounted needs lambda > 0");
    const int N = kernel_c.grid.N;
    auto alpha_nodes = alpha_on_grid(alpha, kernel_c.grid);
    for (int a : aubry)
        if (!(alpha_nodes[a] > 0.0)) throw AlphaVanishesOnAubry();

    detail::DiscountedTables tab(kernel_c, alpha_nodes, lambda);
    std::vector<double> u = warm_start ? std::move(*warm_start)
                                       : std::vector<double>(static_cast<std::size_t>(N), 0.0);
    if (static_cast<int>(u.size()) != N)
        throw std::invalid_argument("solve_discounted: warm start size mismatch");
    std::vector<double> next(static_cast<std::size_t>(N));

    DiscountedSolution sol;
    sol.lambda = lambda;
    sol.alpha_nodes = alpha_nodes;
    double res = kOffBand;
    long it = 0;
    while (it < max_iter) {
        ++it;
        tab.sweep(u, next);
        res = 0.0;
        for (int i = 0; i < N; ++i) res = std::max(res, std::abs(next[i] - u[i]));
        std::swap(u, next);
        if (res <= tol_fp) break;
    }
    if (res > tol_fp)
        throw SolveDiverged("solve_discounted: residual " + std::to_string(res) + " after " +
                            std::to_string(it) + " iterations at lambda " + std::to_string(lambda));
    sol.u = std::move(u);
    sol.policy = tab.policy(sol.u);
    sol.iterations = it;
    sol.residual = res;
    return sol;
}

struct TrajectoryReport {
    std::vector<int> path;                   // start first, backward in time
    std::vector<double> discount_products;   // running product after each step
    double value_recomputed = 0.0;
};

/// Follow the optimal policy backward for n_steps and rebuild the value from
/// running costs and discount factors; telescoping the Bellman equalities
/// bounds |value_recomputed - u(start)| by n_steps * residual.
inline TrajectoryReport backward_trajectory(const DiscountedSolution& sol,
                                            const CostKernel& kernel_c, int start, long n_steps) {
    const int N = kernel_c.grid.N;
    TrajectoryReport rep;
    rep.path.reserve(n_steps + 1);
    rep.path.push_back(start);
    double product = 1.0;
    double value = 0.0;
    int node = start;
    for (long t = 0; t < n_steps; ++t) {
        int k = sol.policy[node];
        int j = (node - k) % N;
        if (j < 0) j += N;
        double abar = 0.5 * (sol.alpha_nodes[j] + sol.alpha_nodes[node]);
        double f = std::exp(-sol.lambda * kernel_c.dt * abar);
        value += product * (f * kernel_c.at(j, k));
        product *= f;
        rep.discount_products.push_back(product);
        node = j;
        rep.path.push_back(node);
    }
    rep.value_recomputed = value + product * sol.u[node];
    return rep;
}

/// Longest run of consecutive visited nodes with alpha <= epsilon.
inline long excursion_stat(const TrajectoryReport& rep, const std::vector<double>& alpha_nodes,
                           double epsilon) {
    if (rep.path.size() < 101)
        throw std::invalid_argument("excursion_stat needs a trajectory of >= 100 steps");
    long worst = 0, run = 0;
    for (int node : rep.path) {
        if (alpha_nodes[node] <= epsilon) {
            ++run;
            worst = std::max(worst, run);
        } else {
            run = 0;
        }
    }
    return worst;
}

}  // namespace hjlab
