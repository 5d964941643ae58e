#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hjlab/barrier.hpp"
#include "hjlab/criticality.hpp"
#include "hjlab/discounted.hpp"

namespace hjlab {

struct U0Formula {
    std::vector<double> u0;
    std::vector<int> chosen_measure;  // argmin measure index per node, lowest wins ties
};

/// The selected limit by the minimizing-measure formula:
///   u0(i) = min over measures of  sum_j alpha_j h(j,i) nu_j / sum_j alpha_j nu_j.
/// Each measure must carry positive alpha mass; a vanishing denominator means
/// the weight vanishes somewhere on a minimizing support, which the model
/// hypotheses exclude.
inline U0Formula u0_formula(const BarrierTable& bt, const MatherFamily& family,
                            const std::vector<double>& alpha_nodes) {
    if (family.measures.empty()) throw std::invalid_argument("u0_formula: empty measure family");
    const int N = bt.N;
    U0Formula out;
    out.u0.assign(static_cast<std::size_t>(N), kOffBand);
    out.chosen_measure.assign(static_cast<std::size_t>(N), -1);
    for (std::size_t m = 0; m < family.measures.size(); ++m) {
        auto nu = family.measures[m].node_weights(N);
        double den = 0.0;
        for (int j = 0; j < N; ++j) den += alpha_nodes[j] * nu[j];
        if (!(den > 1e-12)) throw std::runtime_error("alpha vanishes on a Mather support");
        for (int i = 0; i < N; ++i) {
            double num = 0.0;
            for (int j = 0; j < N; ++j)
                if (nu[j] != 0.0) num += alpha_nodes[j] * bt.at(j, i) * nu[j];
            double ratio = num / den;
            if (ratio < out.u0[i]) {
                out.u0[i] = ratio;
                out.chosen_measure[i] = static_cast<int>(m);
            }
        }
    }
    return out;
}

/// Max over measures of the alpha-weighted node integral of u.
inline double constraint_check(const std::vector<double>& u, const MatherFamily& family,
                               const std::vector<double>& alpha_nodes) {
    double worst = -kOffBand;
    const int N = static_cast<int>(u.size());
    for (const auto& m : family.measures) {
        auto nu = m.node_weights(N);
        double v = 0.0;
        for (int j = 0; j < N; ++j)
            if (nu[j] != 0.0) v += alpha_nodes[j] * u[j] * nu[j];
        worst = std::max(worst, v);
    }
    return worst;
}

/// Pointwise min over Aubry rows of the barrier; the selected limit whenever
/// constants are critical subsolutions.
inline std::vector<double> baby_case_formula(const BarrierTable& bt, const std::vector<int>& aubry) {
    if (aubry.empty()) throw std::invalid_argument("baby_case_formula: empty Aubry set");
    std::vector<double> out(static_cast<std::size_t>(bt.N), kOffBand);
    for (int a : aubry)
        for (int i = 0; i < bt.N; ++i) out[i] = std::min(out[i], bt.at(a, i));
    return out;
}

struct SelectionResult {
    std::vector<double> u0_formula;
    std::vector<double> u0_ladder;  // final rung, no extrapolation
    std::vector<std::pair<double, double>> per_lambda_gap;
    std::vector<int> chosen_measure_per_node;
    std::vector<DiscountedSolution> rungs;
    std::vector<std::string> warnings;
};

inline std::vector<double> geometric_ladder(double lambda_start, double ratio, int rungs) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("ladder ratio must be in (0,1)");
    std::vector<double> l(static_cast<std::size_t>(rungs));
    double v = lambda_start;
    for (int k = 0; k < rungs; ++k, v *= ratio) l[k] = v;
    return l;
}

/// Run the discounted solver down a decreasing ladder of lambdas with warm
/// starts and compare every rung against the measure formula.
inline SelectionResult lambda_ladder(const CostKernel& kernel_c, const AlphaProfile& alpha,
                                     const std::vector<double>& lambdas, const BarrierTable& bt,
                                     const MatherFamily& family, const std::vector<int>& aubry,
                                     double tol_fp = 1e-10, long max_iter = 1'000'000) {
    if (lambdas.empty()) throw std::invalid_argument("lambda_ladder: empty ladder");
    for (std::size_t k = 1; k < lambdas.size(); ++k)
        if (!(lambdas[k] < lambdas[k - 1]))
            throw std::invalid_argument("lambda_ladder: lambdas must decrease");
    if (lambdas.back() < 1e-4)
        throw std::invalid_argument(
            "lambda_ladder: rungs below 1e-4 make the fixed-point iteration impractical");

    auto alpha_nodes = alpha_on_grid(alpha, kernel_c.grid);
    auto formula = u0_formula(bt, family, alpha_nodes);

    SelectionResult res;
    res.u0_formula = formula.u0;
    res.chosen_measure_per_node = formula.chosen_measure;

    WeakKamSolution row = weak_kam_row(bt, kernel_c, aubry.front(), 1e-8);
    double lo = *std::min_element(row.u.begin(), row.u.end());
    std::vector<double> warm(row.u.size());
    for (std::size_t i = 0; i < warm.size(); ++i) warm[i] = row.u[i] - lo;

    for (double lam : lambdas) {
        auto sol = solve_discounted(kernel_c, alpha, lam, aubry, tol_fp, max_iter, warm);
        warm = sol.u;
        double gap = 0.0;
        for (std::size_t i = 0; i < sol.u.size(); ++i)
            gap = std::max(gap, std::abs(sol.u[i] - res.u0_formula[i]));
        res.per_lambda_gap.emplace_back(lam, gap);
        res.rungs.push_back(std::move(sol));
    }
    res.u0_ladder = res.rungs.back().u;

    for (std::size_t k = 1; k < res.per_lambda_gap.size(); ++k) {
        if (res.per_lambda_gap[k].second > res.per_lambda_gap[k - 1].second * 1.10)
            res.warnings.push_back("gap increased between rung " + std::to_string(k - 1) +
                                   " and rung " + std::to_string(k));
    }
    return res;
}

}  // namespace hjlab
