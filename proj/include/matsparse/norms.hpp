#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dense_matrix.hpp"
#include "rng.hpp"

namespace matsparse {

/// Controls the power-iteration spectral norm estimator. `tolerance` is the
/// relative change in the Rayleigh estimate between iterations at which the
/// iteration stops; `seed` determines the random start vector.
struct PowerIterationConfig {
    std::size_t max_iterations = 1;
    double tolerance = 1e-10;
    std::uint64_t seed = 0;

    /// Default budget for an n-by-n matrix: 10n + 100 iterations at 1e-10.
    static PowerIterationConfig defaults(std::size_t n, std::uint64_t seed = 0) {
        return PowerIterationConfig{10 * n + 100, 1e-10, seed};
    }

    void validate() const {
        if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
        if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
    }
};

/// Largest-singular-value estimate plus whether the iteration converged
/// within the budget. The value is valid either way (a lower bound up to
/// estimator error).
struct SpectralEstimate {
    double value = 0.0;
    bool converged = false;
    std::size_t iterations = 0;
};

inline double frobenius_norm_squared(const DenseMatrix& m) {
    double sum = 0.0;
    for (double v : m.data()) sum += v * v;
    return sum;
}

inline double frobenius_norm(const DenseMatrix& m) {
    return std::sqrt(frobenius_norm_squared(m));
}

/// Power iteration on the Gram operator m^T m: the Rayleigh quotient
/// ||m v||^2 of the current unit iterate converges to the squared largest
/// singular value. Deterministic given cfg.seed.
inline SpectralEstimate spectral_norm_estimate(const DenseMatrix& m,
                                               const PowerIterationConfig& cfg) {
    cfg.validate();
    m.require_finite();
    const std::size_t n = m.dim();

    std::vector<double> v(n), w(n), z(n);
    SplitMix64 rng(cfg.seed);
    double vnorm_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = 2.0 * rng.next_double() - 1.0;
        vnorm_sq += v[i] * v[i];
    }
    if (vnorm_sq == 0.0) {
        v[0] = 1.0;
        vnorm_sq = 1.0;
    }
    const double inv = 1.0 / std::sqrt(vnorm_sq);
    for (double& x : v) x *= inv;

    double rayleigh_prev = -1.0;
    for (std::size_t iter = 1; iter <= cfg.max_iterations; ++iter) {
        // w = m v, z = m^T w
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += m(i, j) * v[j];
            w[i] = acc;
        }
        double rayleigh = 0.0;
        for (double x : w) rayleigh += x * x;
        if (rayleigh == 0.0)
            return SpectralEstimate{0.0, true, iter}; // v annihilated; zero matrix in practice

        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) acc += m(i, j) * w[i];
            z[j] = acc;
        }
        double znorm = 0.0;
        for (double x : z) znorm += x * x;
        znorm = std::sqrt(znorm);
        for (std::size_t j = 0; j < n; ++j) v[j] = z[j] / znorm;

        if (rayleigh_prev >= 0.0 &&
            std::abs(rayleigh - rayleigh_prev) <= cfg.tolerance * rayleigh)
            return SpectralEstimate{std::sqrt(rayleigh), true, iter};
        rayleigh_prev = rayleigh;
    }
    return SpectralEstimate{std::sqrt(rayleigh_prev), false, cfg.max_iterations};
}

inline double spectral_norm(const DenseMatrix& m, const PowerIterationConfig& cfg) {
    return spectral_norm_estimate(m, cfg).value;
}

inline double spectral_norm(const DenseMatrix& m) {
    return spectral_norm(m, PowerIterationConfig::defaults(m.dim()));
}

/// Stable rank ||m||_F^2 / ||m||^2, a rank surrogate in [1, rank(m)].
/// Undefined (error) for the zero matrix.
inline double stable_rank(const DenseMatrix& m, const PowerIterationConfig& cfg) {
    const double f_sq = frobenius_norm_squared(m);
    if (f_sq == 0.0) throw std::invalid_argument("stable rank undefined for the zero matrix");
    const double sigma = spectral_norm(m, cfg);
    return f_sq / (sigma * sigma);
}

inline double stable_rank(const DenseMatrix& m) {
    return stable_rank(m, PowerIterationConfig::defaults(m.dim()));
}

} // namespace matsparse
