#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <vector>

#include "hjlab/lattice.hpp"
#include "hjlab/parallel.hpp"

namespace hjlab {

/// Dense N x N min-plus table, row-major, [j * N + i] = from j to i.
using MinPlusTable = std::vector<double>;

/// C(j,i) = min_m A(j,m) + B(m,i). Parallel over output rows; each entry is
/// an independent min, so the result is bit-deterministic for any thread count.
inline MinPlusTable tropical_product(const MinPlusTable& A, const MinPlusTable& B, int N,
                                     int threads = 1) {
    MinPlusTable C(static_cast<std::size_t>(N) * N, kOffBand);
    const double* a = A.data();
    const double* b = B.data();
    double* c = C.data();
    parallel_for(static_cast<std::size_t>(N), threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t j = lo; j < hi; ++j) {
            double* crow = c + j * N;
            for (int m = 0; m < N; ++m) {
                double ajm = a[j * N + m];
                if (ajm >= kOffBand) continue;
                const double* brow = b + static_cast<std::size_t>(m) * N;
                for (int i = 0; i < N; ++i) {
                    double cand = ajm + brow[i];
                    crow[i] = cand < crow[i] ? cand : crow[i];
                }
            }
        }
    });
    return C;
}

inline MinPlusTable tropical_square(const MinPlusTable& A, int N, int threads = 1) {
    return tropical_product(A, A, N, threads);
}

inline MinPlusTable tropical_identity(int N) {
    MinPlusTable I(static_cast<std::size_t>(N) * N, kOffBand);
    for (int i = 0; i < N; ++i) I[static_cast<std::size_t>(i) * N + i] = 0.0;
    return I;
}

/// Dense one-step table of a banded kernel (off-band entries get the sentinel).
inline MinPlusTable densify(const CostKernel& ker) {
    const int N = ker.grid.N;
    MinPlusTable M(static_cast<std::size_t>(N) * N, kOffBand);
    for (int j = 0; j < N; ++j)
        for (int k = -ker.K; k <= ker.K; ++k)
            M[static_cast<std::size_t>(j) * N + ker.target(j, k)] = ker.at(j, k);
    return M;
}

/// n-fold min-plus power of the one-step table (binary powering).
inline MinPlusTable h_steps(const CostKernel& kernel_c, long n, int threads = 1) {
    if (n < 1) throw std::invalid_argument("h_steps needs n >= 1");
    const int N = kernel_c.grid.N;
    MinPlusTable base = densify(kernel_c);
    MinPlusTable acc = tropical_identity(N);
    while (n > 0) {
        if (n & 1) acc = tropical_product(acc, base, N, threads);
        n >>= 1;
        if (n > 0) base = tropical_square(base, N, threads);
    }
    return acc;
}

struct BarrierTable {
    MinPlusTable h;
    int N = 0;
    int steps_used = 0;     // tropical squarings performed
    double residual = 0.0;  // last sup change of the tail minimum

    double at(int j, int i) const { return h[static_cast<std::size_t>(j) * N + i]; }
};

/// Discrete Peierls barrier by repeated tropical squaring.
///
/// The barrier is the tail inf of the n-step tables over n -> infinity, and
/// the tail must range over every integer horizon: on kernels whose optimal
/// cycles have period p > 1, the powers 2^s alone all share one phase mod p
/// and their pointwise limit overshoots the barrier. So the iteration keeps,
/// alongside A_s = M^(2^s), the prefix minimum B_s = min_{n <= 2^s} M^n via
///
///     B_{s+1} = min(B_s, A_s x B_s),   D_{s+1} = A_s x B_s,
///
/// where D_{s+1} is exactly the block minimum over n in (2^s, 2^(s+1)].
/// The running minimum over the last `window` blocks is then a genuine tail
/// minimum covering every integer in the last `window` dyadic ranges, and it
/// converges to the barrier. Stops once its sup change drops below tol_h.
inline BarrierTable peierls(const CostKernel& kernel_c, double tol_h, int window = 4,
                            int threads = 1, int max_squarings = 64) {
    if (window < 1) throw std::invalid_argument("peierls needs window >= 1");
    const int N = kernel_c.grid.N;
    const std::size_t sz = static_cast<std::size_t>(N) * N;
    MinPlusTable A = densify(kernel_c);
    MinPlusTable B = A;
    std::deque<MinPlusTable> blocks{A};  // block for n = 1
    MinPlusTable prev;
    std::vector<double> trace;

    auto tail_min = [&]() {
        MinPlusTable H = blocks.front();
        for (std::size_t q = 1; q < blocks.size(); ++q)
            for (std::size_t t = 0; t < sz; ++t) H[t] = std::min(H[t], blocks[q][t]);
        return H;
    };

    for (int s = 1; s <= max_squarings; ++s) {
        MinPlusTable AB = tropical_product(A, B, N, threads);
        for (std::size_t t = 0; t < sz; ++t) B[t] = std::min(B[t], AB[t]);
        A = tropical_square(A, N, threads);
        blocks.push_back(std::move(AB));
        if (static_cast<int>(blocks.size()) > window) blocks.pop_front();

        MinPlusTable H = tail_min();
        if (!prev.empty()) {
            double change = 0.0;
            for (std::size_t t = 0; t < sz; ++t) {
                double a = std::min(H[t], 1e15), b = std::min(prev[t], 1e15);
                change = std::max(change, std::abs(a - b));
            }
            trace.push_back(change);
            if (change < tol_h) {
                for (double v : H)
                    if (!(v < 1e15))
                        throw std::runtime_error("peierls: unreachable entries at convergence");
                BarrierTable bt;
                bt.h = std::move(H);
                bt.N = N;
                bt.steps_used = s;
                bt.residual = change;
                return bt;
            }
        }
        prev = std::move(H);
    }
    std::string msg = "peierls: no convergence after " + std::to_string(max_squarings) +
                      " squarings; residual trace:";
    for (double r : trace) msg += " " + std::to_string(r);
    throw std::runtime_error(msg);
}

/// Nodes with h(j,j) <= tol_aubry. Empty output signals a tolerance or
/// discretization fault and throws.
inline std::vector<int> aubry_nodes(const BarrierTable& bt, double tol_aubry) {
    std::vector<int> out;
    for (int j = 0; j < bt.N; ++j)
        if (bt.at(j, j) <= tol_aubry) out.push_back(j);
    if (out.empty()) throw std::runtime_error("aubry_nodes: empty set at tolerance");
    return out;
}

struct WeakKamSolution {
    std::vector<double> u;
    int base = 0;
    double fp_residual = 0.0;
};

/// Row h(base, .) of the barrier, certified as a fixed point of one_step_min.
inline WeakKamSolution weak_kam_row(const BarrierTable& bt, const CostKernel& kernel_c, int base,
                                    double tol_fp) {
    WeakKamSolution sol;
    sol.base = base;
    sol.u.assign(bt.h.begin() + static_cast<std::size_t>(base) * bt.N,
                 bt.h.begin() + static_cast<std::size_t>(base + 1) * bt.N);
    auto Tu = one_step_min(kernel_c, sol.u);
    for (int i = 0; i < bt.N; ++i)
        sol.fp_residual = std::max(sol.fp_residual, std::abs(Tu[i] - sol.u[i]));
    if (sol.fp_residual > tol_fp)
        throw std::runtime_error("weak_kam_row: fixed-point residual " +
                                 std::to_string(sol.fp_residual) + " exceeds tolerance");
    return sol;
}

/// Max over kernel edges of u(i) - u(j) - cost(j,k); <= 0 means u is a
/// discrete subsolution.
inline double is_subsolution(const std::vector<double>& u, const CostKernel& kernel_c) {
    double worst = -kOffBand;
    for (int j = 0; j < kernel_c.grid.N; ++j)
        for (int k = -kernel_c.K; k <= kernel_c.K; ++k) {
            int i = kernel_c.target(j, k);
            worst = std::max(worst, u[i] - u[j] - kernel_c.at(j, k));
        }
    return worst;
}

/// Uniqueness-set comparison: if sub <= super on the Aubry nodes (up to
/// premise_slack) then sub <= super + tol everywhere. Vacuously true when the
/// premise fails.
inline bool comparison_check(const std::vector<double>& sub, const std::vector<double>& super,
                             const std::vector<int>& aubry, double tol,
                             double premise_slack = 1e-12) {
    for (int a : aubry)
        if (sub[a] > super[a] + premise_slack) return true;
    for (std::size_t i = 0; i < sub.size(); ++i)
        if (sub[i] > super[i] + tol) return false;
    return true;
}

}  // namespace hjlab
