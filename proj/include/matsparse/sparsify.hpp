#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dense_matrix.hpp"
#include "norms.hpp"
#include "rng.hpp"

namespace matsparse {

/// One retained cell of the sparse sketch. Keys are unique: repeated draws
/// of the same cell are aggregated into a single entry.
struct SketchEntry {
    std::size_t row = 0;
    std::size_t col = 0;
    double value = 0.0;

    friend bool operator==(const SketchEntry&, const SketchEntry&) = default;
};

/// Sparse approximation of a dense matrix: at most `samples` non-zeros,
/// entries in row-major order. `seed` records how the draws were generated.
struct SparseSketch {
    std::size_t n = 0;
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
    std::vector<SketchEntry> entries;

    friend bool operator==(const SparseSketch&, const SparseSketch&) = default;
};

struct PlanEntry {
    std::size_t row = 0;
    std::size_t col = 0;
    double value = 0.0;  // surviving matrix entry
    double weight = 0.0; // value^2, the unnormalized sampling weight
};

/// The squared-magnitude sampling distribution over the non-zeros of a
/// thresholded matrix, in canonical row-major order, plus the sample budget.
/// Cell (i,j) is drawn with probability weight / total_weight.
struct SamplingPlan {
    std::size_t n = 0;
    double epsilon = 0.0;
    double threshold = 0.0; // epsilon / (2n)
    std::uint64_t samples = 0;
    double total_weight = 0.0; // sum of weights = ||A_hat||_F^2
    std::vector<PlanEntry> weights;
    std::vector<double> cumulative; // prefix sums of weight, for inverse-CDF draws

    bool empty() const { return weights.empty(); }
};

/// Zeroes every entry with |a_ij| <= epsilon/(2n); entries strictly above
/// the threshold survive unchanged. The Frobenius distance to the input is
/// at most epsilon/2.
inline DenseMatrix threshold_zero(const DenseMatrix& a, double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("invalid accuracy parameter");
    a.require_finite();
    const std::size_t n = a.dim();
    const double threshold = epsilon / (2.0 * static_cast<double>(n));
    DenseMatrix out(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            out(i, j) = std::abs(a(i, j)) > threshold ? a(i, j) : 0.0;
    return out;
}

/// Sample budget ceil(28 n ln(sqrt(2) n) frob_norm_sq / epsilon^2). Rounding
/// up keeps the guarantee, which is a lower-bound condition on s.
inline std::uint64_t sample_size(std::size_t n, double frob_norm_sq, double epsilon) {
    if (n < 1) throw std::invalid_argument("dimension must be positive");
    if (!(frob_norm_sq > 0.0))
        throw std::invalid_argument("squared Frobenius norm must be positive");
    if (!(epsilon > 0.0)) throw std::invalid_argument("invalid accuracy parameter");
    const double nd = static_cast<double>(n);
    const double s = std::ceil(28.0 * nd * std::log(std::sqrt(2.0) * nd) * frob_norm_sq /
                               (epsilon * epsilon));
    if (!std::isfinite(s) || s > 9.0e18)
        throw std::invalid_argument("sample budget overflows 64 bits");
    return static_cast<std::uint64_t>(s);
}

/// Collects the sampling weights of a thresholded matrix. Every non-zero of
/// `a_hat` must exceed epsilon/(2n) in magnitude; an all-zero matrix yields
/// the distinguished empty plan.
inline SamplingPlan build_plan(const DenseMatrix& a_hat, double epsilon,
                               std::uint64_t samples) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("invalid accuracy parameter");
    a_hat.require_finite();
    const std::size_t n = a_hat.dim();
    SamplingPlan plan;
    plan.n = n;
    plan.epsilon = epsilon;
    plan.threshold = epsilon / (2.0 * static_cast<double>(n));
    plan.samples = samples;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double v = a_hat(i, j);
            if (v == 0.0) continue;
            if (!(std::abs(v) > plan.threshold))
                throw std::invalid_argument("matrix not thresholded at epsilon/(2n)");
            plan.weights.push_back(PlanEntry{i, j, v, v * v});
        }
    plan.cumulative.reserve(plan.weights.size());
    double running = 0.0;
    for (const auto& w : plan.weights) {
        running += w.weight;
        plan.cumulative.push_back(running);
    }
    plan.total_weight = plan.weights.empty() ? 0.0 : plan.cumulative.back();
    return plan;
}

namespace detail {

/// Inverse-CDF draw: one uniform variate, binary search over the cumulative
/// weights.
inline std::size_t draw_plan_index(const SamplingPlan& plan, SplitMix64& rng) {
    const double x = rng.next_double() * plan.cumulative.back();
    const auto it = std::upper_bound(plan.cumulative.begin(), plan.cumulative.end(), x);
    std::size_t idx = static_cast<std::size_t>(it - plan.cumulative.begin());
    if (idx >= plan.weights.size()) idx = plan.weights.size() - 1; // x rounded up to the total
    return idx;
}

} // namespace detail

/// Draws plan.samples cells i.i.d. with replacement and aggregates them:
/// a cell drawn c times contributes (c/s) * value/p with p = weight/W.
/// Deterministic given the seed; draw t consumes exactly one variate.
inline SparseSketch draw_sketch(const SamplingPlan& plan, std::uint64_t seed) {
    SparseSketch sketch;
    sketch.n = plan.n;
    sketch.samples = plan.samples;
    sketch.seed = seed;
    if (plan.empty()) return sketch;

    std::vector<std::uint64_t> counts(plan.weights.size(), 0);
    SplitMix64 rng(seed);
    for (std::uint64_t t = 0; t < plan.samples; ++t)
        counts[detail::draw_plan_index(plan, rng)] += 1;

    const double s = static_cast<double>(plan.samples);
    for (std::size_t k = 0; k < plan.weights.size(); ++k) {
        if (counts[k] == 0) continue;
        const auto& w = plan.weights[k];
        const double p = w.weight / plan.total_weight;
        const double value = (static_cast<double>(counts[k]) / s) * (w.value / p);
        sketch.entries.push_back(SketchEntry{w.row, w.col, value});
    }
    return sketch;
}

/// Whole pipeline: threshold at epsilon/(2n), size the budget from the
/// input's squared Frobenius norm, sample by squared magnitude. An input
/// whose thresholded form is all-zero yields the empty sketch, which still
/// meets the epsilon guarantee.
inline SparseSketch sparsify(const DenseMatrix& a, double epsilon, std::uint64_t seed) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("invalid accuracy parameter");
    a.require_finite();
    const double f_sq = frobenius_norm_squared(a);
    if (f_sq == 0.0) return SparseSketch{a.dim(), 0, seed, {}};
    const std::uint64_t s = sample_size(a.dim(), f_sq, epsilon);
    const DenseMatrix a_hat = threshold_zero(a, epsilon);
    return draw_sketch(build_plan(a_hat, epsilon, s), seed);
}

/// Relative-error variant: resolves epsilon_rel against the spectral norm
/// and delegates. Needs two passes over the matrix (the norm first), so it
/// has no streaming counterpart.
inline SparseSketch sparsify_relative(const DenseMatrix& a, double epsilon_rel,
                                      std::uint64_t seed, const PowerIterationConfig& cfg) {
    if (!(epsilon_rel > 0.0)) throw std::invalid_argument("invalid accuracy parameter");
    a.require_finite();
    if (frobenius_norm_squared(a) == 0.0)
        throw std::invalid_argument(
            "relative mode requires a non-zero matrix (relative error is undefined when ||A|| = 0)");
    const double epsilon = epsilon_rel * spectral_norm(a, cfg);
    return sparsify(a, epsilon, seed);
}

inline SparseSketch sparsify_relative(const DenseMatrix& a, double epsilon_rel,
                                      std::uint64_t seed) {
    return sparsify_relative(a, epsilon_rel, seed, PowerIterationConfig::defaults(a.dim()));
}

inline DenseMatrix densify(const SparseSketch& sketch) {
    DenseMatrix m(sketch.n);
    for (const auto& e : sketch.entries) m(e.row, e.col) = e.value;
    return m;
}

} // namespace matsparse
