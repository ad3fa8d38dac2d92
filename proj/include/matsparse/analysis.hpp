#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dense_matrix.hpp"
#include "norms.hpp"
#include "sparsify.hpp"

namespace matsparse {

/// Inputs of the matrix Bernstein tail bound for an average of `samples`
/// i.i.d. zero-mean n-by-n matrices: deviation tau, variance proxy rho_sq,
/// almost-sure norm bound gamma, and the target failure probability delta.
struct BernsteinParams {
    std::uint64_t samples = 1;
    double tau = 0.0;
    double rho_sq = 0.0;
    double gamma = 0.0;
    std::size_t n = 1;
    double delta = 0.5;

    void validate() const {
        if (samples < 1) throw std::invalid_argument("samples must be positive");
        if (!(tau > 0.0) || !(rho_sq > 0.0) || !(gamma > 0.0))
            throw std::invalid_argument("tau, rho_sq, gamma must be positive");
        if (n < 1) throw std::invalid_argument("dimension must be positive");
        if (!(delta > 0.0) || !(delta <= 1.0))
            throw std::invalid_argument("delta must lie in (0,1]");
    }
};

/// Failure-probability bound 2n exp(-(s tau^2 / 2) / (rho^2 + gamma tau / 3)),
/// clamped to [0,1] since the raw expression exceeds 1 for small s.
inline double bernstein_tail(const BernsteinParams& p) {
    p.validate();
    const double s = static_cast<double>(p.samples);
    const double exponent = -(s * p.tau * p.tau / 2.0) / (p.rho_sq + p.gamma * p.tau / 3.0);
    const double raw = 2.0 * static_cast<double>(p.n) * std::exp(exponent);
    return raw < 1.0 ? raw : 1.0;
}

/// Smallest sample count ceil(14 n frob_norm_sq ln(2n/delta) / epsilon^2)
/// meeting failure probability delta. At delta = 1/n this coincides exactly
/// with sample_size (ln(2n * n) = 2 ln(sqrt(2) n)). delta = 1 is allowed so
/// the identity covers n = 1.
inline std::uint64_t sample_size_for_delta(std::size_t n, double frob_norm_sq,
                                           double epsilon, double delta) {
    if (n < 1) throw std::invalid_argument("dimension must be positive");
    if (!(frob_norm_sq > 0.0))
        throw std::invalid_argument("squared Frobenius norm must be positive");
    if (!(epsilon > 0.0)) throw std::invalid_argument("invalid accuracy parameter");
    if (!(delta > 0.0) || !(delta <= 1.0))
        throw std::invalid_argument("delta must lie in (0,1]");
    const double nd = static_cast<double>(n);
    const double s = std::ceil(14.0 * nd * frob_norm_sq * std::log(2.0 * nd / delta) /
                               (epsilon * epsilon));
    if (!std::isfinite(s) || s > 9.0e18)
        throw std::invalid_argument("sample budget overflows 64 bits");
    return static_cast<std::uint64_t>(s);
}

/// Exact second moments of the per-draw deviation matrix
/// M = (value/p) e_i e_j^T - A_hat under the squared-magnitude distribution,
/// computed two ways: the closed form ||A_hat||_F^2 diag(nnz per row) -
/// A_hat A_hat^T (and its transposed analogue with column counts), and a
/// direct enumeration over the support. gamma_realized is the largest
/// per-draw norm bound ||A_hat||_F^2/|value| + ||A_hat||_F over the support.
struct MomentDiagnostics {
    std::vector<std::size_t> row_nnz;
    std::vector<std::size_t> col_nnz;
    DenseMatrix closed_form_second_moment;
    DenseMatrix enumerated_second_moment;
    DenseMatrix closed_form_second_moment_transposed;
    DenseMatrix enumerated_second_moment_transposed;
    double gamma_realized;
};

namespace detail {

constexpr std::size_t kEnumerationLimit = 64;

inline DenseMatrix times_transpose(const DenseMatrix& m, bool transpose_first) {
    // transpose_first=false: m m^T; true: m^T m
    const std::size_t n = m.dim();
    DenseMatrix out(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                acc += transpose_first ? m(k, i) * m(k, j) : m(i, k) * m(j, k);
            out(i, j) = acc;
        }
    return out;
}

/// Literal enumeration of sum over the support of p_ij * D D^T (or D^T D)
/// with D = (value/p_ij) e_i e_j^T - a_hat. Kept free of the closed form's
/// simplifications on purpose: this is the oracle side.
inline DenseMatrix enumerate_second_moment(const DenseMatrix& a_hat, double total_weight,
                                           bool transpose_first) {
    const std::size_t n = a_hat.dim();
    DenseMatrix acc(n);
    DenseMatrix deviation(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double v = a_hat(i, j);
            if (v == 0.0) continue;
            const double p = v * v / total_weight;
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t c = 0; c < n; ++c) deviation(r, c) = -a_hat(r, c);
            deviation(i, j) += v / p;
            const DenseMatrix product = times_transpose(deviation, transpose_first);
            for (std::size_t k = 0; k < n * n; ++k)
                acc.data()[k] += p * product.data()[k];
        }
    return acc;
}

inline void require_enumeration_size(std::size_t n) {
    if (n > kEnumerationLimit)
        throw std::invalid_argument("enumeration oracle limited to n <= " +
                                    std::to_string(kEnumerationLimit) + ", got n = " +
                                    std::to_string(n));
}

} // namespace detail

inline MomentDiagnostics exact_second_moment(const DenseMatrix& a_hat) {
    a_hat.require_finite();
    detail::require_enumeration_size(a_hat.dim());
    const std::size_t n = a_hat.dim();
    const double total_weight = frobenius_norm_squared(a_hat);
    if (total_weight == 0.0)
        throw std::invalid_argument("second moment undefined for the zero matrix");
    const double frob = std::sqrt(total_weight);

    std::vector<std::size_t> row_nnz(n, 0), col_nnz(n, 0);
    double min_abs = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double v = a_hat(i, j);
            if (v == 0.0) continue;
            row_nnz[i] += 1;
            col_nnz[j] += 1;
            if (min_abs == 0.0 || std::abs(v) < min_abs) min_abs = std::abs(v);
        }

    DenseMatrix closed = scale(detail::times_transpose(a_hat, false), -1.0);
    for (std::size_t i = 0; i < n; ++i)
        closed(i, i) += total_weight * static_cast<double>(row_nnz[i]);
    DenseMatrix closed_t = scale(detail::times_transpose(a_hat, true), -1.0);
    for (std::size_t j = 0; j < n; ++j)
        closed_t(j, j) += total_weight * static_cast<double>(col_nnz[j]);

    return MomentDiagnostics{
        std::move(row_nnz),
        std::move(col_nnz),
        std::move(closed),
        detail::enumerate_second_moment(a_hat, total_weight, false),
        std::move(closed_t),
        detail::enumerate_second_moment(a_hat, total_weight, true),
        total_weight / min_abs + frob,
    };
}

/// Enumerates E(M) = sum over the support of p_ij ((value/p_ij) e_i e_j^T -
/// a_hat) and checks it vanishes: Frobenius norm at most 1e-12 relative to
/// ||a_hat||_F.
inline bool verify_zero_mean(const DenseMatrix& a_hat) {
    a_hat.require_finite();
    detail::require_enumeration_size(a_hat.dim());
    const std::size_t n = a_hat.dim();
    const double total_weight = frobenius_norm_squared(a_hat);
    if (total_weight == 0.0)
        throw std::invalid_argument("mean check undefined for the zero matrix");

    DenseMatrix acc(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double v = a_hat(i, j);
            if (v == 0.0) continue;
            const double p = v * v / total_weight;
            for (std::size_t k = 0; k < n * n; ++k) acc.data()[k] -= p * a_hat.data()[k];
            acc(i, j) += p * (v / p);
        }
    return frobenius_norm(acc) <= 1e-12 * std::sqrt(total_weight);
}

/// Spectral norm of the residual a - densify(sketch), the quantity the
/// epsilon guarantee is stated in.
inline double measure_error(const DenseMatrix& a, const SparseSketch& sketch,
                            const PowerIterationConfig& cfg) {
    if (a.dim() != sketch.n)
        throw std::invalid_argument("dimension mismatch between matrix and sketch");
    return spectral_norm(subtract(a, densify(sketch)), cfg);
}

inline double measure_error(const DenseMatrix& a, const SparseSketch& sketch) {
    return measure_error(a, sketch, PowerIterationConfig::defaults(a.dim()));
}

/// Per-seed error records of repeated sparsification runs, with the
/// theoretical failure bound alongside the measurement.
struct ExperimentReport {
    std::string matrix_label;
    std::size_t n = 0;
    double epsilon = 0.0;
    double threshold = 0.0;
    double frob_norm_sq = 0.0;
    std::uint64_t samples = 0;
    std::size_t trials = 0;
    std::vector<std::uint64_t> seeds;
    std::vector<double> per_trial_errors;
    double empirical_failure_rate = 0.0;
    double theoretical_failure_bound = 0.0;
    double gamma_realized_max = 0.0; // largest per-draw norm bound seen across all trials
    double gamma_bound = 0.0;        // 4 n ||A_hat||_F^2 / epsilon
    double wall_time_seconds = 0.0;
};

/// Runs `trials` independent sparsifications with seeds base_seed + t,
/// measures each spectral error, and tallies the rate of errors strictly
/// above epsilon against the 1/n bound. Realized per-draw gamma values are
/// recovered from each sketch's support (a cell appears there iff it was
/// drawn, and the bound depends only on which cell was drawn).
inline ExperimentReport run_experiment(const DenseMatrix& a, double epsilon,
                                       std::size_t trials, std::uint64_t base_seed,
                                       const PowerIterationConfig& cfg,
                                       const std::string& label = "") {
    if (trials < 1) throw std::invalid_argument("trials must be positive");
    if (!(epsilon > 0.0)) throw std::invalid_argument("invalid accuracy parameter");
    a.require_finite();
    const auto start = std::chrono::steady_clock::now();

    const std::size_t n = a.dim();
    const DenseMatrix a_hat = threshold_zero(a, epsilon);
    const double hat_f_sq = frobenius_norm_squared(a_hat);
    const double hat_f = std::sqrt(hat_f_sq);

    ExperimentReport report;
    report.matrix_label = label;
    report.n = n;
    report.epsilon = epsilon;
    report.threshold = epsilon / (2.0 * static_cast<double>(n));
    report.frob_norm_sq = frobenius_norm_squared(a);
    report.trials = trials;
    report.theoretical_failure_bound = 1.0 / static_cast<double>(n);
    report.gamma_bound = 4.0 * static_cast<double>(n) * hat_f_sq / epsilon;

    std::size_t failures = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        const std::uint64_t seed = base_seed + t;
        const SparseSketch sketch = sparsify(a, epsilon, seed);
        if (t == 0) report.samples = sketch.samples;
        const double err = measure_error(a, sketch, cfg);
        report.seeds.push_back(seed);
        report.per_trial_errors.push_back(err);
        if (err > epsilon) failures += 1;
        for (const auto& e : sketch.entries) {
            const double gamma = hat_f_sq / std::abs(a_hat(e.row, e.col)) + hat_f;
            if (gamma > report.gamma_realized_max) report.gamma_realized_max = gamma;
        }
    }
    report.empirical_failure_rate =
        static_cast<double>(failures) / static_cast<double>(trials);
    report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

inline ExperimentReport run_experiment(const DenseMatrix& a, double epsilon,
                                       std::size_t trials, std::uint64_t base_seed) {
    return run_experiment(a, epsilon, trials, base_seed,
                          PowerIterationConfig::defaults(a.dim()));
}

} // namespace matsparse
