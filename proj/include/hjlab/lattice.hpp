#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "hjlab/model.hpp"

namespace hjlab {

/// Off-band sentinel. Large enough to lose every min, small enough that a few
/// additions cannot overflow. Converged tables are checked to stay < 1e15.
inline constexpr double kOffBand = 1e30;

struct Grid {
    int N = 0;

    explicit Grid(int n) : N(n) {
        if (n < 8) throw std::invalid_argument("grid needs N >= 8");
    }
    double dx() const { return 1.0 / N; }
    double x(int i) const { return static_cast<double>(i) / N; }
};

/// Minimal signed representative of (i - j) mod N; ties (|k| = N/2) go to +N/2.
struct Displacement {
    int k = 0;
};

inline Displacement displacement(int j, int i, int N) {
    int d = (i - j) % N;
    if (d < 0) d += N;
    if (2 * d > N) d -= N;
    return Displacement{d};
}

enum class Quadrature : std::uint8_t { Source, Midpoint };

/// One-step action table on the periodic grid.
///
/// cost(j, k) = dt * ( L(x_eval, v_k) + c ),  v_k = k / (N dt),  |k| <= K,
/// with x_eval the source node (default) or the step midpoint. The table is
/// the min-plus generator: every dynamic program in the artifact composes it.
struct CostKernel {
    Grid grid{8};
    int K = 1;
    double dt = 1.0;
    double c = 0.0;
    Quadrature quadrature = Quadrature::Source;
    std::vector<double> cost;  // N rows of (2K+1), index [j * (2K+1) + (k+K)]

    int width() const { return 2 * K + 1; }
    double at(int j, int k) const { return cost[static_cast<std::size_t>(j) * width() + (k + K)]; }
    double& at(int j, int k) { return cost[static_cast<std::size_t>(j) * width() + (k + K)]; }
    int target(int j, int k) const {
        int i = (j + k) % grid.N;
        return i < 0 ? i + grid.N : i;
    }
    double velocity(int k) const { return static_cast<double>(k) / (grid.N * dt); }

    /// Same geometry, entries shifted to constant c_new.
    CostKernel with_constant(double c_new) const {
        CostKernel out = *this;
        double shift = dt * (c_new - c);
        for (double& v : out.cost) v += shift;
        out.c = c_new;
        return out;
    }
};

inline CostKernel build_kernel(Grid grid, const ModelSpec& model, int K, double dt, double c,
                               Quadrature quadrature = Quadrature::Source) {
    if (K < 1 || 4 * K > grid.N) throw std::invalid_argument("kernel bandwidth needs 1 <= K <= N/4");
    if (!(dt > 0.0)) throw std::invalid_argument("kernel needs dt > 0");
    CostKernel ker;
    ker.grid = grid;
    ker.K = K;
    ker.dt = dt;
    ker.c = c;
    ker.quadrature = quadrature;
    ker.cost.resize(static_cast<std::size_t>(grid.N) * ker.width());
    for (int j = 0; j < grid.N; ++j) {
        for (int k = -K; k <= K; ++k) {
            double v = ker.velocity(k);
            double xe = grid.x(j);
            if (quadrature == Quadrature::Midpoint)
                xe = CirclePoint::wrap(xe + 0.5 * k / grid.N).x;
            ker.at(j, k) = dt * (eval_L(model, CirclePoint::wrap(xe), v) + c);
        }
    }
    return ker;
}

/// One Lax-Oleinik step: (Tu)(i) = min_k u(i-k) + cost(i-k, k).
/// Monotone in u and commutes with adding constants.
inline std::vector<double> one_step_min(const CostKernel& ker, const std::vector<double>& u) {
    int N = ker.grid.N;
    if (static_cast<int>(u.size()) != N)
        throw std::invalid_argument("one_step_min: table size does not match the grid");
    std::vector<double> out(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) {
        double best = kOffBand;
        for (int k = -ker.K; k <= ker.K; ++k) {
            int j = i - k;
            j %= N;
            if (j < 0) j += N;
            double cand = u[j] + ker.at(j, k);
            if (cand < best) best = cand;
        }
        out[i] = best;
    }
    return out;
}

}  // namespace hjlab
