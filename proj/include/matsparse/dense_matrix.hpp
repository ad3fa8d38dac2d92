#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace matsparse {

/// Square n-by-n matrix of doubles, row-major storage. Indices are 0-based
/// everywhere inside the library; the Matrix Market layer converts to the
/// 1-based external convention at the I/O boundary and nowhere else.
class DenseMatrix {
public:
    explicit DenseMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {
        if (n == 0) throw std::invalid_argument("matrix dimension must be positive");
    }

    /// Builds from nested braces; all rows must have length n.
    DenseMatrix(std::initializer_list<std::initializer_list<double>> rows)
        : DenseMatrix(rows.size()) {
        std::size_t i = 0;
        for (const auto& row : rows) {
            if (row.size() != n_)
                throw std::invalid_argument("matrix rows must all have length n");
            std::size_t j = 0;
            for (double v : row) (*this)(i, j++) = v;
            ++i;
        }
        require_finite();
    }

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix m(n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static DenseMatrix diagonal(const std::vector<double>& d) {
        DenseMatrix m(d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }

    std::size_t dim() const { return n_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
    const double& operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    /// Entries must be finite reals; NaN/Inf are rejected wherever a matrix
    /// enters the library from outside.
    void require_finite() const {
        if (!all_finite())
            throw std::invalid_argument("matrix entries must be finite (no NaN/Inf)");
    }

    std::size_t nonzero_count() const {
        std::size_t count = 0;
        for (double v : data_)
            if (v != 0.0) count += 1;
        return count;
    }

    friend bool operator==(const DenseMatrix& a, const DenseMatrix& b) {
        return a.n_ == b.n_ && a.data_ == b.data_;
    }

private:
    std::size_t n_;
    std::vector<double> data_;
};

inline DenseMatrix subtract(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.dim() != b.dim())
        throw std::invalid_argument("dimension mismatch: " + std::to_string(a.dim()) +
                                    " vs " + std::to_string(b.dim()));
    DenseMatrix out(a.dim());
    for (std::size_t k = 0; k < a.data().size(); ++k)
        out.data()[k] = a.data()[k] - b.data()[k];
    return out;
}

inline DenseMatrix scale(const DenseMatrix& a, double c) {
    DenseMatrix out(a.dim());
    for (std::size_t k = 0; k < a.data().size(); ++k) out.data()[k] = c * a.data()[k];
    return out;
}

} // namespace matsparse
