#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "hjlab/lattice.hpp"

namespace hjlab {

struct MeanCycleResult {
    double mu_star = 0.0;            // minimum cycle mean, cost per step
    std::vector<int> witness;        // node sequence of one optimal simple cycle
    double karp_value = 0.0;         // raw DP value, kept for diagnostics
};

namespace detail {

/// Mean of a cycle given as a node sequence, edges summed in sequence order.
inline double cycle_mean(const CostKernel& ker, const std::vector<int>& cyc) {
    double total = 0.0;
    int n = static_cast<int>(cyc.size());
    for (int t = 0; t < n; ++t) {
        int j = cyc[t];
        int i = cyc[(t + 1) % n];
        int k = displacement(j, i, ker.grid.N).k;
        total += ker.at(j, k);
    }
    return total / n;
}

/// Rotate a cycle so its smallest node comes first.
inline std::vector<int> canonical_rotation(std::vector<int> cyc) {
    auto it = std::min_element(cyc.begin(), cyc.end());
    std::rotate(cyc.begin(), it, cyc.end());
    return cyc;
}

}  // namespace detail

/// Karp's dynamic program for the minimum cycle mean of a cost kernel.
///
/// D_n(i) = min over length-n walks ending at i (all nodes start at 0), and
/// mu = min_i max_k (D_N(i) - D_k(i)) / (N - k). The reported mu_star is the
/// witness cycle's mean recomputed in canonical node order, so it compares
/// exactly against an enumeration oracle that sums edges the same way.
inline MeanCycleResult min_mean_cycle(const CostKernel& ker) {
    const int N = ker.grid.N;
    const int K = ker.K;
    std::vector<double> prev(static_cast<std::size_t>(N), 0.0), cur(static_cast<std::size_t>(N));
    // parent[n][i] = predecessor node chosen at stage n
    std::vector<std::vector<int>> parent(static_cast<std::size_t>(N) + 1,
                                         std::vector<int>(static_cast<std::size_t>(N), -1));
    std::vector<std::vector<double>> D;
    D.reserve(N + 1);
    D.push_back(prev);
    for (int n = 1; n <= N; ++n) {
        for (int i = 0; i < N; ++i) {
            double best = kOffBand;
            int bestj = -1;
            for (int k = -K; k <= K; ++k) {
                int j = (i - k) % N;
                if (j < 0) j += N;
                double cand = prev[j] + ker.at(j, k);
                if (cand < best) {
                    best = cand;
                    bestj = j;
                }
            }
            cur[i] = best;
            parent[n][i] = bestj;
        }
        D.push_back(cur);
        std::swap(prev, cur);
    }

    double mu = kOffBand;
    int argi = -1;
    for (int i = 0; i < N; ++i) {
        double worst = -kOffBand;
        for (int k = 0; k < N; ++k)
            worst = std::max(worst, (D[N][i] - D[k][i]) / (N - k));
        if (worst < mu) {
            mu = worst;
            argi = i;
        }
    }

    // Parent walk from (N, argi) contains at least one cycle attaining mu.
    std::vector<int> walk(static_cast<std::size_t>(N) + 1);
    walk[N] = argi;
    for (int n = N; n >= 1; --n) walk[n - 1] = parent[n][walk[n]];

    MeanCycleResult res;
    res.karp_value = mu;
    const double tol = 1e-9 * (1.0 + std::abs(mu));
    std::vector<int> nodes(walk.begin(), walk.end());
    std::vector<int> best_cycle;
    double best_mean = kOffBand;
    while (true) {
        std::vector<int> last_pos(static_cast<std::size_t>(N), -1);
        int cut_lo = -1, cut_hi = -1;
        for (int p = 0; p < static_cast<int>(nodes.size()); ++p) {
            int v = nodes[p];
            if (last_pos[v] >= 0) {
                cut_lo = last_pos[v];
                cut_hi = p;
                break;
            }
            last_pos[v] = p;
        }
        if (cut_lo < 0) break;
        std::vector<int> cyc(nodes.begin() + cut_lo, nodes.begin() + cut_hi);
        cyc = detail::canonical_rotation(std::move(cyc));
        double mean = detail::cycle_mean(ker, cyc);
        if (mean < best_mean) {
            best_mean = mean;
            best_cycle = cyc;
        }
        if (std::abs(mean - mu) <= tol) break;
        nodes.erase(nodes.begin() + cut_lo, nodes.begin() + cut_hi);
    }
    if (best_cycle.empty()) throw std::runtime_error("min_mean_cycle: no cycle on the Karp walk");
    res.witness = best_cycle;
    res.mu_star = best_mean;
    return res;
}

/// Discrete critical value: c = -mu_star / dt for the raw (c = 0) kernel.
inline double critical_value(const CostKernel& raw_kernel) {
    return -min_mean_cycle(raw_kernel).mu_star / raw_kernel.dt;
}

// ---------------------------------------------------------------------------
// Tight graph and minimizing cycle measures
// ---------------------------------------------------------------------------

struct TightEdge {
    int j = 0;
    int k = 0;
};

/// Edges where the subsolution inequality is an equality for `potential`.
/// `potential` must be a fixed point of one_step_min on kernel_c.
inline std::vector<TightEdge> tight_graph(const CostKernel& kernel_c,
                                          const std::vector<double>& potential,
                                          double tol_tight) {
    const int N = kernel_c.grid.N;
    std::vector<TightEdge> out;
    for (int j = 0; j < N; ++j)
        for (int k = -kernel_c.K; k <= kernel_c.K; ++k) {
            int i = kernel_c.target(j, k);
            if (std::abs(potential[i] - potential[j] - kernel_c.at(j, k)) <= tol_tight)
                out.push_back({j, k});
        }
    if (out.empty())
        throw std::runtime_error("tight_graph: empty tight graph contradicts optimal cycles");
    return out;
}

/// Normalized nonnegative edge flow; cycle measures carry uniform weights.
struct DiscreteClosedMeasure {
    struct Edge {
        int j = 0;
        int k = 0;
        double weight = 0.0;
    };
    std::vector<Edge> edges;

    std::vector<double> node_weights(int N) const {
        std::vector<double> w(static_cast<std::size_t>(N), 0.0);
        for (const auto& e : edges) w[e.j] += e.weight;  // source-node projection
        return w;
    }
};

/// Max node imbalance |inflow - outflow|; 0 for cycle measures.
inline double check_closed(const DiscreteClosedMeasure& m, int N) {
    std::vector<double> in(static_cast<std::size_t>(N), 0.0), out(static_cast<std::size_t>(N), 0.0);
    for (const auto& e : m.edges) {
        out[e.j] += e.weight;
        int i = (e.j + e.k) % N;
        if (i < 0) i += N;
        in[i] += e.weight;
    }
    double worst = 0.0;
    for (int v = 0; v < N; ++v) worst = std::max(worst, std::abs(in[v] - out[v]));
    return worst;
}

struct MatherFamily {
    std::vector<DiscreteClosedMeasure> measures;
    std::vector<std::vector<int>> cycles;  // node sequences backing each measure
    double c_grid = 0.0;
    bool truncated = false;  // enumeration cap reached; family may be incomplete
};

namespace detail {

/// Iterative Tarjan SCC over the tight subgraph. Returns component ids.
inline std::vector<int> tarjan_scc(int N, const std::vector<std::vector<int>>& succ) {
    std::vector<int> index(static_cast<std::size_t>(N), -1), low(static_cast<std::size_t>(N), 0),
        comp(static_cast<std::size_t>(N), -1);
    std::vector<bool> on_stack(static_cast<std::size_t>(N), false);
    std::vector<int> stack;
    int next_index = 0, next_comp = 0;
    struct Frame {
        int v;
        std::size_t child;
    };
    for (int root = 0; root < N; ++root) {
        if (index[root] >= 0) continue;
        std::vector<Frame> frames{{root, 0}};
        index[root] = low[root] = next_index++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!frames.empty()) {
            Frame& f = frames.back();
            if (f.child < succ[f.v].size()) {
                int w = succ[f.v][f.child++];
                if (index[w] < 0) {
                    index[w] = low[w] = next_index++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    frames.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[f.v] = std::min(low[f.v], index[w]);
                }
            } else {
                if (low[f.v] == index[f.v]) {
                    while (true) {
                        int w = stack.back();
                        stack.pop_back();
                        on_stack[w] = false;
                        comp[w] = next_comp;
                        if (w == f.v) break;
                    }
                    ++next_comp;
                }
                int v = f.v;
                frames.pop_back();
                if (!frames.empty()) low[frames.back().v] = std::min(low[frames.back().v], low[v]);
            }
        }
    }
    return comp;
}

}  // namespace detail

/// Enumerate simple cycles of the tight graph (inside its strongly connected
/// components, canonical smallest-node start), keep those whose mean running
/// cost certifies a minimizing measure, and return them as uniform cycle
/// measures. The list is capped at 64, shorter cycles first.
inline MatherFamily extreme_measures(const CostKernel& kernel_c, const std::vector<TightEdge>& tight,
                                     int L_max, double tol_mmc) {
    if (tight.empty()) throw std::invalid_argument("extreme_measures: tight edge set is empty");
    const int N = kernel_c.grid.N;
    const double c_grid = kernel_c.c;
    std::vector<std::vector<int>> succ(static_cast<std::size_t>(N));
    for (const auto& e : tight) succ[e.j].push_back(kernel_c.target(e.j, e.k));
    for (auto& s : succ) std::sort(s.begin(), s.end());
    std::vector<int> comp = detail::tarjan_scc(N, succ);

    MatherFamily fam;
    fam.c_grid = c_grid;
    std::vector<std::vector<int>> found;
    long budget = 2'000'000;  // DFS step cap for pathological tight graphs
    std::vector<char> on_path(static_cast<std::size_t>(N), 0);

    struct Frame {
        int v;
        std::size_t child;
    };
    for (int start = 0; start < N && !fam.truncated; ++start) {
        std::vector<int> path{start};
        std::vector<Frame> frames{{start, 0}};
        on_path[start] = 1;
        while (!frames.empty()) {
            if (--budget <= 0 || static_cast<int>(found.size()) >= 4096) {
                fam.truncated = true;
                break;
            }
            Frame& f = frames.back();
            if (f.child < succ[f.v].size()) {
                int w = succ[f.v][f.child++];
                if (comp[w] != comp[start]) continue;
                if (w == start) {
                    if (static_cast<int>(path.size()) <= L_max) found.push_back(path);
                    continue;
                }
                if (w > start && !on_path[w] && static_cast<int>(path.size()) < L_max) {
                    on_path[w] = 1;
                    path.push_back(w);
                    frames.push_back({w, 0});
                }
            } else {
                on_path[f.v] = 0;
                path.pop_back();
                frames.pop_back();
            }
        }
        for (int v : path) on_path[v] = 0;  // reset after truncation mid-walk
    }

    std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        return a < b;
    });
    for (const auto& cyc : found) {
        double total = 0.0;
        for (std::size_t t = 0; t < cyc.size(); ++t) {
            int j = cyc[t];
            int i = cyc[(t + 1) % cyc.size()];
            total += kernel_c.at(j, displacement(j, i, N).k);
        }
        // mean raw cost per unit time must be -c_grid: the c-shifted mean is 0
        if (std::abs(total) > tol_mmc * static_cast<double>(cyc.size()) * kernel_c.dt) continue;
        DiscreteClosedMeasure m;
        double w = 1.0 / static_cast<double>(cyc.size());
        for (std::size_t t = 0; t < cyc.size(); ++t) {
            int j = cyc[t];
            int i = cyc[(t + 1) % cyc.size()];
            m.edges.push_back({j, displacement(j, i, N).k, w});
        }
        fam.measures.push_back(std::move(m));
        fam.cycles.push_back(cyc);
        if (fam.measures.size() >= 64) {
            fam.truncated = fam.truncated || &cyc != &found.back();
            break;
        }
    }
    return fam;
}

struct InclusionReport {
    bool ok = true;
    std::string detail;
};

/// Every node carrying measure weight must sit within one grid cell of the
/// Aubry node set.
inline InclusionReport mather_in_aubry(const MatherFamily& family, const std::vector<int>& aubry,
                                       int N) {
    InclusionReport rep;
    std::vector<char> near(static_cast<std::size_t>(N), 0);
    for (int a : aubry)
        for (int d = -1; d <= 1; ++d) {
            int v = (a + d) % N;
            if (v < 0) v += N;
            near[v] = 1;
        }
    for (std::size_t mi = 0; mi < family.measures.size(); ++mi) {
        auto nw = family.measures[mi].node_weights(N);
        for (int v = 0; v < N; ++v) {
            if (nw[v] > 0.0 && !near[v]) {
                rep.ok = false;
                rep.detail += "measure " + std::to_string(mi) + " charges node " +
                              std::to_string(v) + " away from the Aubry set; ";
            }
        }
    }
    return rep;
}

}  // namespace hjlab
