#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include <matsparse/norms.hpp>
#include <matsparse/select.hpp>
#include <matsparse/sparsify.hpp>

#include "testing.hpp"

using namespace matsparse;
using boost::multiprecision::cpp_rational;
using testing_support::chi_square_critical_alpha_001;
using testing_support::chi_square_statistic;
using testing_support::ks_two_sample_consistent;
using testing_support::normalize_frobenius_sq;
using testing_support::random_matrix;
using testing_support::ScratchDir;

namespace {

VectorEntryStream two_entry_stream(double first, double second) {
    return VectorEntryStream(2, {{0, 0, first}, {0, 1, second}});
}

/// Exact selection probability of item k (0-based) in a stream of integer
/// weights: the replacement probability of item k times the survival
/// probabilities of everything after it, evaluated in exact rationals.
cpp_rational exact_selection_probability(const std::vector<long>& weights, std::size_t k) {
    cpp_rational running = 0;
    cpp_rational prob = 0;
    for (std::size_t j = 0; j < weights.size(); ++j) {
        running += weights[j];
        const cpp_rational replace = cpp_rational(weights[j]) / running;
        if (j == k) prob = replace;
        if (j > k) prob *= (1 - replace);
    }
    return prob;
}

} // namespace

TEST_CASE("the replacement-probability product telescopes to weight over total") {
    const std::vector<std::vector<long>> weight_sets = {
        {9, 16},
        {1, 1, 1},
        {4, 9, 1, 25, 16},
        {7, 7, 2, 100},
        {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16}, // 4x4 worth of cells
    };
    for (const auto& weights : weight_sets) {
        const long total = std::accumulate(weights.begin(), weights.end(), 0L);
        for (std::size_t k = 0; k < weights.size(); ++k)
            CHECK(exact_selection_probability(weights, k) ==
                  cpp_rational(weights[k]) / total);
    }
}

TEST_CASE("selector_step accepts the first qualifying entry with certainty") {
    for (std::uint64_t seed = 0; seed < 32; ++seed) {
        SelectorState state;
        state.threshold_sq = 0.01;
        state.rng = SplitMix64(seed);
        selector_step(state, StreamEntry{2, 3, -0.5});
        CHECK(state.has_selection);
        CHECK(state.row == 2);
        CHECK(state.col == 3);
        CHECK(state.selected_value == -0.5);
        CHECK(state.accumulated_weight == 0.25);
    }
}

TEST_CASE("a non-qualifying entry leaves the state untouched, variate included") {
    SelectorState a;
    a.threshold_sq = 0.25;
    a.rng = SplitMix64(7);
    SelectorState b = a;

    selector_step(a, StreamEntry{0, 0, 0.5}); // 0.25 > 0.25 is false: skipped
    CHECK(!a.has_selection);
    CHECK(a.accumulated_weight == 0.0);

    // if the skip had consumed a variate, the next accept/reject would differ
    for (int k = 0; k < 8; ++k) {
        selector_step(a, StreamEntry{1, 1, 2.0 + k});
        selector_step(b, StreamEntry{1, 1, 2.0 + k});
    }
    CHECK(a.row == b.row);
    CHECK(a.col == b.col);
    CHECK(a.selected_value == b.selected_value);
    CHECK(a.accumulated_weight == b.accumulated_weight);
}

TEST_CASE("two-entry stream selects the heavier entry with probability 16/25") {
    const std::size_t runs = 100000;
    std::uint64_t heavier = 0;
    for (std::uint64_t seed = 0; seed < runs; ++seed) {
        auto stream = two_entry_stream(3.0, 4.0);
        const auto state = run_select(stream, 1e-3, seed);
        REQUIRE(state.has_selection);
        if (state.selected_value == 4.0) ++heavier;
    }
    const double expected = 16.0 / 25.0 * runs;
    const double stat = chi_square_statistic({heavier, runs - heavier},
                                             {expected, runs - expected});
    CHECK(stat < chi_square_critical_alpha_001(1));
}

TEST_CASE("run_select returns a lone qualifying entry with probability one") {
    for (std::uint64_t seed = 0; seed < 16; ++seed) {
        VectorEntryStream stream(3, {{0, 1, 0.0}, {2, 2, -1.5}, {1, 0, 0.0}});
        const auto state = run_select(stream, 0.1, seed);
        REQUIRE(state.has_selection);
        CHECK(state.row == 2);
        CHECK(state.col == 2);
        CHECK(state.selected_value == -1.5);
        CHECK(state.accumulated_weight == 2.25);
    }
}

TEST_CASE("run_select with nothing qualifying reports the empty selection") {
    VectorEntryStream stream(2, {{0, 0, 0.001}, {1, 1, -0.002}});
    const auto state = run_select(stream, 1.0, 3); // threshold 0.25
    CHECK(!state.has_selection);
    CHECK(state.accumulated_weight == 0.0);
}

TEST_CASE("selection frequencies match the squared-magnitude distribution") {
    const std::size_t runs = 100000;
    const auto a_hat = DenseMatrix::diagonal({3.0, 4.0});

    auto frequencies = [&](bool reversed) {
        std::uint64_t count_four = 0;
        for (std::uint64_t seed = 0; seed < runs; ++seed) {
            std::vector<StreamEntry> entries = {{0, 0, 3.0}, {1, 1, 4.0}};
            if (reversed) std::reverse(entries.begin(), entries.end());
            VectorEntryStream stream(2, std::move(entries));
            const auto state = run_select(stream, 0.1, seed);
            REQUIRE(state.has_selection);
            if (state.selected_value == 4.0) ++count_four;
        }
        return count_four;
    };

    for (bool reversed : {false, true}) {
        const std::uint64_t four = frequencies(reversed);
        const double stat = chi_square_statistic(
            {runs - four, four}, {runs * 9.0 / 25.0, runs * 16.0 / 25.0});
        INFO((reversed ? "reversed" : "forward") << " order, chi-square " << stat);
        CHECK(stat < chi_square_critical_alpha_001(1));
    }
}

TEST_CASE("permuting the stream leaves the selection distribution unchanged") {
    const std::size_t runs = 100000;
    const DenseMatrix m{{1.0, 2.0}, {3.0, 4.0}}; // weights 1,4,9,16 over total 30

    auto cell_counts = [&](const std::vector<std::size_t>& order) {
        std::vector<std::uint64_t> counts(4, 0);
        for (std::uint64_t seed = 0; seed < runs; ++seed) {
            std::vector<StreamEntry> entries;
            for (std::size_t flat : order)
                entries.push_back(StreamEntry{flat / 2, flat % 2, m(flat / 2, flat % 2)});
            VectorEntryStream stream(2, std::move(entries));
            const auto state = run_select(stream, 0.1, seed);
            REQUIRE(state.has_selection);
            counts[state.row * 2 + state.col] += 1;
        }
        return counts;
    };

    const std::vector<double> expected = {runs * 1.0 / 30.0, runs * 4.0 / 30.0,
                                          runs * 9.0 / 30.0, runs * 16.0 / 30.0};
    for (const auto& order :
         std::vector<std::vector<std::size_t>>{{0, 1, 2, 3}, {3, 0, 2, 1}}) {
        const auto counts = cell_counts(order);
        const double stat = chi_square_statistic(counts, expected);
        CHECK(stat < chi_square_critical_alpha_001(3));
    }
}

TEST_CASE("final N accumulates the thresholded squared frobenius norm in any order") {
    const auto a = random_matrix(6, 512);
    const double epsilon = 0.8;
    const auto a_hat = threshold_zero(a, epsilon);
    const double expected = frobenius_norm_squared(a_hat);

    std::vector<std::size_t> order(36);
    std::iota(order.begin(), order.end(), 0);
    SplitMix64 rng(99);
    for (int shuffle = 0; shuffle < 4; ++shuffle) {
        for (std::size_t k = order.size(); k > 1; --k)
            std::swap(order[k - 1], order[rng.next_u64() % k]);
        std::vector<StreamEntry> entries;
        for (std::size_t flat : order)
            entries.push_back(StreamEntry{flat / 6, flat % 6, a(flat / 6, flat % 6)});
        VectorEntryStream stream(6, std::move(entries));
        const auto state = run_select(stream, epsilon, 1);
        CHECK(std::abs(state.accumulated_weight - expected) <= 1e-12 * expected);
    }
}

TEST_CASE("stream adapters count reads and reject malformed streams") {
    const auto m = random_matrix(4, 3);
    auto stream = VectorEntryStream::from_matrix(m);
    std::size_t pulled = 0;
    while (stream.next()) ++pulled;
    CHECK(pulled == 16);
    CHECK(stream.reads() == 16);

    VectorEntryStream dup(2, {{0, 0, 1.0}, {0, 0, 2.0}});
    CHECK(dup.next());
    CHECK_THROWS_AS(dup.next(), std::invalid_argument);

    VectorEntryStream range(2, {{5, 0, 1.0}});
    CHECK_THROWS_AS(range.next(), std::invalid_argument);

    VectorEntryStream infinite(2, {{0, 0, std::nan("")}});
    CHECK_THROWS_AS(infinite.next(), std::invalid_argument);
}

TEST_CASE("coordinate files stream sequentially with exact read counts") {
    ScratchDir dir("stream_coord");
    const auto path = dir.file("stream.mtx");
    {
        std::ofstream out(path);
        out << "%%MatrixMarket matrix coordinate real general\n"
            << "3 3 4\n"
            << "1 1 0.5\n"
            << "2 3 -2.0\n"
            << "3 1 1.25\n"
            << "3 3 0.75\n";
    }
    CoordinateStream stream(path);
    CHECK(stream.dim() == 3);
    CHECK(stream.declared_entry_count() == 4);
    std::size_t pulled = 0;
    while (stream.next()) ++pulled;
    CHECK(pulled == 4);
    CHECK(stream.reads() == stream.declared_entry_count());

    const auto dup_path = dir.file("dup.mtx");
    {
        std::ofstream out(dup_path);
        out << "%%MatrixMarket matrix coordinate real general\n"
            << "2 2 2\n"
            << "1 1 1.0\n"
            << "1 1 2.0\n";
    }
    CoordinateStream dup(dup_path);
    CHECK(dup.next());
    CHECK_THROWS_AS(dup.next(), std::invalid_argument);

    CHECK_THROWS_AS(CoordinateStream(dir.file("absent.mtx")), MatrixMarketError);
}

TEST_CASE("selector copies are one record each and independent") {
    const auto m = DenseMatrix::diagonal({3.0, 4.0});
    {
        auto stream = VectorEntryStream::from_matrix(m);
        const auto copies = run_select_copies(stream, 0.1, 64, 5);
        CHECK(copies.size() == 64);
        CHECK(stream.reads() == 4);
    }

    // covariance of the two copies' selection indicators over many base seeds
    const std::size_t runs = 100000;
    std::uint64_t x_sum = 0, y_sum = 0, xy_sum = 0;
    for (std::uint64_t seed = 0; seed < runs; ++seed) {
        auto stream = VectorEntryStream::from_matrix(m);
        const auto copies = run_select_copies(stream, 0.1, 2, seed);
        const int x = copies[0].has_selection && copies[0].selected_value == 4.0;
        const int y = copies[1].has_selection && copies[1].selected_value == 4.0;
        x_sum += x;
        y_sum += y;
        xy_sum += x * y;
    }
    const double t = static_cast<double>(runs);
    const double mean_x = x_sum / t, mean_y = y_sum / t;
    const double covariance = xy_sum / t - mean_x * mean_y;
    const double var_x = mean_x * (1 - mean_x), var_y = mean_y * (1 - mean_y);
    CHECK(std::abs(covariance) <= 5.0 * std::sqrt(var_x * var_y / t));
}

TEST_CASE("one-pass sparsify of an all-zero stream is empty") {
    auto stream = VectorEntryStream::from_matrix(DenseMatrix(3));
    const auto sketch = one_pass_sparsify(stream, 1.0, 10, 4);
    CHECK(sketch.n == 3);
    CHECK(sketch.samples == 10);
    CHECK(sketch.entries.empty());
}

TEST_CASE("one selector copy on a single qualifying entry reproduces it") {
    VectorEntryStream stream(2, {{0, 0, 1.5}});
    const auto sketch = one_pass_sparsify(stream, 0.5, 1, 123);
    REQUIRE(sketch.entries.size() == 1);
    CHECK(sketch.entries[0].row == 0);
    CHECK(sketch.entries[0].col == 0);
    CHECK(sketch.entries[0].value == 1.5); // p = S^2/N = 1
}

TEST_CASE("one-pass and in-memory samplers agree in distribution") {
    const auto a = normalize_frobenius_sq(random_matrix(8, 2025), 1.0);
    const double epsilon = 0.7;
    const std::uint64_t samples = 2000;
    const auto a_hat = threshold_zero(a, epsilon);
    const auto plan = build_plan(a_hat, epsilon, samples);
    const auto cfg = PowerIterationConfig::defaults(8, 77);

    const std::size_t trials = 200;
    std::vector<double> errors_memory, errors_stream;
    std::vector<double> mean_memory(64, 0.0), mean_stream(64, 0.0);
    std::vector<double> sq_memory(64, 0.0), sq_stream(64, 0.0);
    for (std::size_t t = 0; t < trials; ++t) {
        const auto sk_memory = draw_sketch(plan, 100 + t);
        auto stream = VectorEntryStream::from_matrix(a);
        const auto sk_stream = one_pass_sparsify(stream, epsilon, samples, 5000 + t);

        errors_memory.push_back(spectral_norm(subtract(a, densify(sk_memory)), cfg));
        errors_stream.push_back(spectral_norm(subtract(a, densify(sk_stream)), cfg));
        const auto dm = densify(sk_memory), ds = densify(sk_stream);
        for (std::size_t k = 0; k < 64; ++k) {
            mean_memory[k] += dm.data()[k];
            sq_memory[k] += dm.data()[k] * dm.data()[k];
            mean_stream[k] += ds.data()[k];
            sq_stream[k] += ds.data()[k] * ds.data()[k];
        }
    }

    CHECK(ks_two_sample_consistent(errors_memory, errors_stream, 0.001));

    const double t = static_cast<double>(trials);
    for (std::size_t k = 0; k < 64; ++k) {
        const double mm = mean_memory[k] / t, ms = mean_stream[k] / t;
        const double vm = std::max(0.0, sq_memory[k] / t - mm * mm);
        const double vs = std::max(0.0, sq_stream[k] / t - ms * ms);
        const double stderr_diff = std::sqrt((vm + vs) / t);
        if (stderr_diff == 0.0)
            CHECK(mm == ms);
        else
            CHECK(std::abs(mm - ms) <= 5.0 * stderr_diff);
    }
}

TEST_CASE("one-pass sampler validates its arguments") {
    auto stream = VectorEntryStream::from_matrix(DenseMatrix::identity(2));
    CHECK_THROWS_AS(one_pass_sparsify(stream, 1.0, 0, 1), std::invalid_argument);
    auto stream2 = VectorEntryStream::from_matrix(DenseMatrix::identity(2));
    CHECK_THROWS_AS(one_pass_sparsify(stream2, 0.0, 5, 1), std::invalid_argument);
}
