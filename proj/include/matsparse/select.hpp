#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <unordered_set>
#include <utility>
#include <vector>

#include "matrix_market.hpp"
#include "rng.hpp"
#include "sparsify.hpp"

namespace matsparse {

struct StreamEntry {
    std::size_t row = 0; // 0-based
    std::size_t col = 0;
    double value = 0.0;
};

/// One-pass source of matrix entries: each (i,j) appears at most once, in
/// arbitrary order. Adapters validate indices, reject duplicate keys, and
/// count how many entries they have handed out.
class EntryStream {
public:
    virtual ~EntryStream() = default;
    virtual std::size_t dim() const = 0;
    virtual std::optional<StreamEntry> next() = 0;
    /// Number of entries delivered so far (the one-pass read counter).
    virtual std::size_t reads() const = 0;
};

namespace detail {

/// Validates entries as they pass through an adapter. The key set is
/// adapter bookkeeping proportional to the entries seen; the sampler itself
/// stays at O(s) selector records.
class StreamEntryGuard {
public:
    explicit StreamEntryGuard(std::size_t n) : n_(n) {}

    void check(std::size_t row, std::size_t col, double value) {
        if (row >= n_ || col >= n_)
            throw std::invalid_argument("stream entry index out of range");
        if (!std::isfinite(value))
            throw std::invalid_argument("stream entry value must be finite");
        const std::uint64_t key = static_cast<std::uint64_t>(row) * n_ + col;
        if (!seen_.insert(key).second)
            throw std::invalid_argument("duplicate stream entry at (" +
                                        std::to_string(row + 1) + "," +
                                        std::to_string(col + 1) + ")");
    }

private:
    std::size_t n_;
    std::unordered_set<std::uint64_t> seen_;
};

} // namespace detail

/// In-memory stream for tests and for replaying a dense matrix in a chosen
/// order.
class VectorEntryStream final : public EntryStream {
public:
    VectorEntryStream(std::size_t n, std::vector<StreamEntry> entries)
        : n_(n), entries_(std::move(entries)), guard_(n) {}

    /// All n^2 cells of a dense matrix in row-major order.
    static VectorEntryStream from_matrix(const DenseMatrix& m) {
        std::vector<StreamEntry> entries;
        entries.reserve(m.dim() * m.dim());
        for (std::size_t i = 0; i < m.dim(); ++i)
            for (std::size_t j = 0; j < m.dim(); ++j)
                entries.push_back(StreamEntry{i, j, m(i, j)});
        return VectorEntryStream(m.dim(), std::move(entries));
    }

    std::size_t dim() const override { return n_; }

    std::optional<StreamEntry> next() override {
        if (pos_ >= entries_.size()) return std::nullopt;
        const StreamEntry e = entries_[pos_++];
        guard_.check(e.row, e.col, e.value);
        reads_ += 1;
        return e;
    }

    std::size_t reads() const override { return reads_; }

private:
    std::size_t n_;
    std::vector<StreamEntry> entries_;
    detail::StreamEntryGuard guard_;
    std::size_t pos_ = 0;
    std::size_t reads_ = 0;
};

/// Streams a Matrix Market coordinate file front to back; the file is the
/// one-pass source and is never reopened or rewound.
class CoordinateStream final : public EntryStream {
public:
    explicit CoordinateStream(const std::string& path)
        : reader_(path), guard_(reader_.dim()) {}

    std::size_t dim() const override { return reader_.dim(); }
    std::size_t declared_entry_count() const { return reader_.declared_entry_count(); }

    std::optional<StreamEntry> next() override {
        auto c = reader_.next();
        if (!c) return std::nullopt;
        guard_.check(c->row, c->col, c->value);
        reads_ += 1;
        return StreamEntry{c->row, c->col, c->value};
    }

    std::size_t reads() const override { return reads_; }

private:
    CoordinateFileReader reader_;
    detail::StreamEntryGuard guard_;
    std::size_t reads_ = 0;
};

/// Running state of one weighted single-sample selector. N accumulates the
/// squared magnitudes of the qualifying entries seen so far; the candidate
/// (row, col, value) is replaced by each qualifying entry with probability
/// value^2 / N. Fixed size regardless of the matrix dimension.
struct SelectorState {
    double accumulated_weight = 0.0; // N
    bool has_selection = false;
    std::size_t row = 0;
    std::size_t col = 0;
    double selected_value = 0.0;   // S
    double threshold_sq = 0.0;     // epsilon^2 / (4 n^2)
    SplitMix64 rng;
};

static_assert(std::is_trivially_copyable_v<SelectorState>,
              "selector records must be flat fixed-size state");

/// Advances one selector by one stream entry. Entries at or below the
/// squared threshold are skipped entirely (N untouched, no variate drawn);
/// a qualifying entry is accepted with probability value^2 / N_new, and the
/// first qualifying entry is always accepted.
inline void selector_step(SelectorState& state, const StreamEntry& entry) {
    const double w = entry.value * entry.value;
    if (!(w > state.threshold_sq)) return;
    state.accumulated_weight += w;
    if (state.rng.next_double() < w / state.accumulated_weight) {
        state.has_selection = true;
        state.row = entry.row;
        state.col = entry.col;
        state.selected_value = entry.value;
    }
}

/// Runs `count` independent selectors over one pass of the stream. Copy k is
/// seeded with split_seed(seed, k). Memory is `count` fixed-size records; no
/// per-dimension state.
inline std::vector<SelectorState> run_select_copies(EntryStream& stream, double epsilon,
                                                    std::uint64_t count, std::uint64_t seed) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("invalid accuracy parameter");
    if (count < 1) throw std::invalid_argument("selector count must be positive");
    const double nd = static_cast<double>(stream.dim());
    const double threshold_sq = epsilon * epsilon / (4.0 * nd * nd);

    std::vector<SelectorState> copies(count);
    for (std::uint64_t k = 0; k < count; ++k) {
        copies[k].threshold_sq = threshold_sq;
        copies[k].rng = SplitMix64(split_seed(seed, k));
    }
    while (auto entry = stream.next())
        for (auto& copy : copies) selector_step(copy, *entry);
    return copies;
}

/// Single-copy SELECT: returns the final state, whose N equals the squared
/// Frobenius norm of the thresholded stream and whose candidate is
/// distributed as value^2 / N over the qualifying entries. A stream with no
/// qualifying entries yields the empty-selection state (N = 0), which is a
/// legitimate outcome, not an error.
inline SelectorState run_select(EntryStream& stream, double epsilon, std::uint64_t seed) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("invalid accuracy parameter");
    const double nd = static_cast<double>(stream.dim());
    SelectorState state;
    state.threshold_sq = epsilon * epsilon / (4.0 * nd * nd);
    state.rng = SplitMix64(seed);
    while (auto entry = stream.next()) selector_step(state, *entry);
    return state;
}

/// Assembles a sketch from finished selector copies, mirroring the
/// aggregation of draw_sketch: each copy is one sample with p = S^2 / N.
inline SparseSketch assemble_sketch(const std::vector<SelectorState>& copies, std::size_t n,
                                    std::uint64_t seed) {
    SparseSketch sketch;
    sketch.n = n;
    sketch.samples = copies.size();
    sketch.seed = seed;

    std::map<std::pair<std::size_t, std::size_t>, std::pair<std::uint64_t, double>> cells;
    for (const auto& copy : copies) {
        if (!copy.has_selection) continue;
        auto& cell = cells[{copy.row, copy.col}];
        cell.first += 1;
        cell.second = copy.selected_value; // identical across copies: keys are unique upstream
    }
    const double s = static_cast<double>(copies.size());
    const double total = copies.empty() ? 0.0 : copies.front().accumulated_weight;
    for (const auto& [key, cell] : cells) {
        const double value = cell.second;
        const double p = (value * value) / total;
        const double aggregated = (static_cast<double>(cell.first) / s) * (value / p);
        sketch.entries.push_back(SketchEntry{key.first, key.second, aggregated});
    }
    return sketch;
}

/// One-pass sparsification: `samples` selector copies advance in lockstep
/// over a single traversal of the stream, then their selections are
/// aggregated exactly like the with-replacement sampler. Memory is O(samples)
/// selector records; each stream entry is read once.
inline SparseSketch one_pass_sparsify(EntryStream& stream, double epsilon,
                                      std::uint64_t samples, std::uint64_t seed) {
    if (samples < 1) throw std::invalid_argument("sample budget must be positive");
    const auto copies = run_select_copies(stream, epsilon, samples, seed);
    return assemble_sketch(copies, stream.dim(), seed);
}

} // namespace matsparse
