#pragma once

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dense_matrix.hpp"

namespace matsparse {

/// I/O failures (unreadable file, malformed header, truncated data).
/// Distinct from std::invalid_argument so the CLI can map them to a
/// separate exit code.
class MatrixMarketError : public std::runtime_error {
public:
    explicit MatrixMarketError(const std::string& what) : std::runtime_error(what) {}
};

struct Coordinate {
    std::size_t row = 0; // 0-based
    std::size_t col = 0;
    double value = 0.0;
};

namespace detail {

inline std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

/// Shortest-round-trip would do, but %.17g is simple and guarantees the
/// written text parses back to the identical double.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct MmHeader {
    bool coordinate = false; // else array
    std::size_t rows = 0, cols = 0, nnz = 0;
};

/// Parses the banner, comment lines, and the size line. The banner must be
/// `%%MatrixMarket matrix {array|coordinate} real general`; keywords after
/// the banner tag are case-insensitive.
inline MmHeader read_header(std::istream& in, const std::string& path) {
    std::string line;
    if (!std::getline(in, line)) throw MatrixMarketError(path + ": empty file");
    std::istringstream banner(line);
    std::string tag, object, format, field, symmetry;
    banner >> tag >> object >> format >> field >> symmetry;
    if (tag != "%%MatrixMarket")
        throw MatrixMarketError(path + ": missing %%MatrixMarket banner");
    if (lower(object) != "matrix")
        throw MatrixMarketError(path + ": unsupported object '" + object + "'");
    format = lower(format);
    if (format != "array" && format != "coordinate")
        throw MatrixMarketError(path + ": unsupported format '" + format + "'");
    if (lower(field) != "real")
        throw MatrixMarketError(path + ": unsupported field '" + field + "' (need real)");
    if (lower(symmetry) != "general")
        throw MatrixMarketError(path + ": unsupported symmetry '" + symmetry + "' (need general)");

    while (std::getline(in, line)) {
        if (!line.empty() && line[0] == '%') continue;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        break;
    }
    if (!in && line.empty()) throw MatrixMarketError(path + ": missing size line");

    MmHeader h;
    h.coordinate = (format == "coordinate");
    std::istringstream size_line(line);
    long long rows = 0, cols = 0, nnz = 0;
    if (h.coordinate) {
        if (!(size_line >> rows >> cols >> nnz))
            throw MatrixMarketError(path + ": malformed coordinate size line");
    } else {
        if (!(size_line >> rows >> cols))
            throw MatrixMarketError(path + ": malformed array size line");
    }
    if (rows < 1 || cols < 1 || nnz < 0)
        throw MatrixMarketError(path + ": invalid dimensions");
    h.rows = static_cast<std::size_t>(rows);
    h.cols = static_cast<std::size_t>(cols);
    h.nnz = static_cast<std::size_t>(nnz);
    return h;
}

} // namespace detail

/// Reads a dense square matrix from either the `array` or the `coordinate`
/// variant. Coordinate files must not repeat an (i,j) key.
inline DenseMatrix read_matrix_market(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MatrixMarketError(path + ": cannot open for reading");
    const auto h = detail::read_header(in, path);
    if (h.rows != h.cols)
        throw std::invalid_argument(path + ": matrix must be square, got " +
                                    std::to_string(h.rows) + "x" + std::to_string(h.cols));
    DenseMatrix m(h.rows);
    if (h.coordinate) {
        std::vector<bool> seen(h.rows * h.cols, false);
        for (std::size_t k = 0; k < h.nnz; ++k) {
            long long i = 0, j = 0;
            double v = 0.0;
            if (!(in >> i >> j >> v))
                throw MatrixMarketError(path + ": truncated coordinate data");
            if (i < 1 || j < 1 || static_cast<std::size_t>(i) > h.rows ||
                static_cast<std::size_t>(j) > h.cols)
                throw std::invalid_argument(path + ": index out of range");
            const std::size_t flat = static_cast<std::size_t>(i - 1) * h.cols +
                                     static_cast<std::size_t>(j - 1);
            if (seen[flat])
                throw std::invalid_argument(path + ": duplicate entry at (" +
                                            std::to_string(i) + "," + std::to_string(j) + ")");
            seen[flat] = true;
            m(static_cast<std::size_t>(i - 1), static_cast<std::size_t>(j - 1)) = v;
        }
    } else {
        // array variant stores values column by column
        for (std::size_t j = 0; j < h.cols; ++j)
            for (std::size_t i = 0; i < h.rows; ++i) {
                double v = 0.0;
                if (!(in >> v)) throw MatrixMarketError(path + ": truncated array data");
                m(i, j) = v;
            }
    }
    m.require_finite();
    return m;
}

inline void write_matrix_market_array(const std::string& path, const DenseMatrix& m) {
    std::ofstream out(path);
    if (!out) throw MatrixMarketError(path + ": cannot open for writing");
    out << "%%MatrixMarket matrix array real general\n";
    out << m.dim() << " " << m.dim() << "\n";
    for (std::size_t j = 0; j < m.dim(); ++j)
        for (std::size_t i = 0; i < m.dim(); ++i)
            out << detail::format_double(m(i, j)) << "\n";
    if (!out) throw MatrixMarketError(path + ": write failed");
}

/// Writes 1-based coordinate triples; `entries` are 0-based and are written
/// in the order given.
inline void write_matrix_market_coordinate(const std::string& path, std::size_t n,
                                           const std::vector<Coordinate>& entries) {
    std::ofstream out(path);
    if (!out) throw MatrixMarketError(path + ": cannot open for writing");
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << n << " " << n << " " << entries.size() << "\n";
    for (const auto& e : entries)
        out << (e.row + 1) << " " << (e.col + 1) << " " << detail::format_double(e.value)
            << "\n";
    if (!out) throw MatrixMarketError(path + ": write failed");
}

/// Sequential reader over a coordinate file, one entry per call. This is the
/// file-backed one-pass source: entries are surfaced in file order and the
/// file is read exactly once, front to back.
class CoordinateFileReader {
public:
    explicit CoordinateFileReader(const std::string& path) : in_(path), path_(path) {
        if (!in_) throw MatrixMarketError(path + ": cannot open for reading");
        const auto h = detail::read_header(in_, path);
        if (!h.coordinate)
            throw std::invalid_argument(path + ": streaming needs the coordinate variant");
        if (h.rows != h.cols)
            throw std::invalid_argument(path + ": matrix must be square");
        n_ = h.rows;
        remaining_ = h.nnz;
        declared_nnz_ = h.nnz;
    }

    std::size_t dim() const { return n_; }
    std::size_t declared_entry_count() const { return declared_nnz_; }

    std::optional<Coordinate> next() {
        if (remaining_ == 0) return std::nullopt;
        long long i = 0, j = 0;
        double v = 0.0;
        if (!(in_ >> i >> j >> v))
            throw MatrixMarketError(path_ + ": truncated coordinate data");
        if (i < 1 || j < 1 || static_cast<std::size_t>(i) > n_ ||
            static_cast<std::size_t>(j) > n_)
            throw std::invalid_argument(path_ + ": index out of range");
        remaining_ -= 1;
        return Coordinate{static_cast<std::size_t>(i - 1), static_cast<std::size_t>(j - 1), v};
    }

private:
    std::ifstream in_;
    std::string path_;
    std::size_t n_ = 0;
    std::size_t remaining_ = 0;
    std::size_t declared_nnz_ = 0;
};

} // namespace matsparse
