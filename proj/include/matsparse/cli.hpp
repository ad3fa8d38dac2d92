#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "analysis.hpp"
#include "matrix_market.hpp"
#include "norms.hpp"
#include "report_io.hpp"
#include "select.hpp"
#include "sparsify.hpp"

namespace matsparse {

enum class Command { sparsify, stream, verify, experiment, moments };
enum class EpsilonMode { absolute, relative };
enum class ReportFormat { json, csv };

/// Exit code classes: every failure mode maps to a distinct nonzero code so
/// scripts can tell usage mistakes from bad files from failed verification.
namespace exit_code {
constexpr int ok = 0;
constexpr int usage = 2;
constexpr int io = 3;
constexpr int validation = 4;
constexpr int verify_failed = 5;
} // namespace exit_code

struct CliConfig {
    Command command = Command::sparsify;
    std::string input_path;
    std::string output_path;
    std::string sketch_path; // verify only
    std::optional<double> epsilon;
    EpsilonMode epsilon_mode = EpsilonMode::absolute;
    std::optional<std::uint64_t> s_override;
    std::optional<double> frob_sq; // stream only: lets the caller supply ||A||_F^2
    std::uint64_t seed = 0;
    std::size_t trials = 200;
    ReportFormat report_format = ReportFormat::json;
};

class UsageError : public std::runtime_error {
public:
    explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline double required_epsilon(const CliConfig& cfg) {
    if (!cfg.epsilon) throw UsageError("--epsilon is required");
    if (!(*cfg.epsilon > 0.0))
        throw std::invalid_argument("invalid accuracy parameter (epsilon must be positive)");
    return *cfg.epsilon;
}

/// Resolves relative mode against the spectral norm (two passes by nature).
inline double resolve_epsilon(const CliConfig& cfg, const DenseMatrix& a) {
    const double eps = required_epsilon(cfg);
    if (cfg.epsilon_mode == EpsilonMode::absolute) return eps;
    if (frobenius_norm_squared(a) == 0.0)
        throw std::invalid_argument(
            "relative mode requires a non-zero matrix (relative error is undefined when ||A|| = 0)");
    return eps * spectral_norm(a, PowerIterationConfig::defaults(a.dim()));
}

inline void write_sketch_files(const CliConfig& cfg, const SparseSketch& sketch,
                               double epsilon) {
    if (cfg.output_path.empty()) throw UsageError("--output is required");
    std::vector<Coordinate> coords;
    coords.reserve(sketch.entries.size());
    for (const auto& e : sketch.entries) coords.push_back(Coordinate{e.row, e.col, e.value});
    write_matrix_market_coordinate(cfg.output_path, sketch.n, coords);
    write_text_file(cfg.output_path + ".json", sketch_sidecar(sketch, epsilon).dump(2) + "\n");
}

inline void print_sketch_summary(std::ostream& out, const SparseSketch& sketch,
                                 double epsilon) {
    out << "n " << sketch.n << "\n"
        << "s " << sketch.samples << "\n"
        << "nnz " << sketch.entries.size() << "\n"
        << "threshold "
        << format_double(epsilon / (2.0 * static_cast<double>(sketch.n))) << "\n";
}

inline SparseSketch read_sketch(const std::string& path) {
    CoordinateStream stream(path);
    SparseSketch sketch;
    sketch.n = stream.dim();
    while (auto e = stream.next())
        sketch.entries.push_back(SketchEntry{e->row, e->col, e->value});
    sketch.samples = sketch.entries.size();
    return sketch;
}

inline std::optional<double> sidecar_epsilon(const std::string& sketch_path) {
    std::ifstream in(sketch_path + ".json");
    if (!in) return std::nullopt;
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;
    }
    if (!doc.contains("epsilon")) return std::nullopt;
    return doc["epsilon"].get<double>();
}

} // namespace detail

/// Threshold-and-sample a dense input; writes the sketch as a coordinate
/// file plus a JSON sidecar, and prints n, s, nnz, threshold.
inline int cmd_sparsify(const CliConfig& cfg, std::ostream& out = std::cout) {
    const DenseMatrix a = read_matrix_market(cfg.input_path);
    const double epsilon = detail::resolve_epsilon(cfg, a);
    SparseSketch sketch;
    if (cfg.s_override) {
        sketch = draw_sketch(build_plan(threshold_zero(a, epsilon), epsilon, *cfg.s_override),
                             cfg.seed);
    } else {
        sketch = sparsify(a, epsilon, cfg.seed);
    }
    detail::write_sketch_files(cfg, sketch, epsilon);
    detail::print_sketch_summary(out, sketch, epsilon);
    return exit_code::ok;
}

/// One-pass sparsification of a coordinate file. The sample budget must be
/// supplied (directly or via --frob-sq) because a single pass cannot know
/// ||A||_F^2 before it ends.
inline int cmd_stream(const CliConfig& cfg, std::ostream& out = std::cout) {
    const double epsilon = detail::required_epsilon(cfg);
    CoordinateStream stream(cfg.input_path);
    std::uint64_t samples = 0;
    if (cfg.s_override) {
        samples = *cfg.s_override;
    } else if (cfg.frob_sq) {
        samples = sample_size(stream.dim(), *cfg.frob_sq, epsilon);
    } else {
        throw UsageError("stream mode needs --samples or --frob-sq");
    }
    const SparseSketch sketch = one_pass_sparsify(stream, epsilon, samples, cfg.seed);
    detail::write_sketch_files(cfg, sketch, epsilon);
    detail::print_sketch_summary(out, sketch, epsilon);
    out << "reads " << stream.reads() << "\n";
    return exit_code::ok;
}

/// Measures ||A - sketch|| and reports PASS/FAIL against epsilon (taken
/// from --epsilon or the sketch's sidecar).
inline int cmd_verify(const CliConfig& cfg, std::ostream& out = std::cout) {
    const DenseMatrix a = read_matrix_market(cfg.input_path);
    if (cfg.sketch_path.empty()) throw UsageError("--sketch is required");
    const SparseSketch sketch = detail::read_sketch(cfg.sketch_path);

    std::optional<double> epsilon = cfg.epsilon;
    if (!epsilon) epsilon = detail::sidecar_epsilon(cfg.sketch_path);
    if (!epsilon)
        throw UsageError("no epsilon: pass --epsilon or keep the sketch sidecar next to it");

    const double err =
        measure_error(a, sketch, PowerIterationConfig::defaults(a.dim()));
    const bool pass = !(err > *epsilon);
    out << "error " << detail::format_double(err) << "\n"
        << "epsilon " << detail::format_double(*epsilon) << "\n"
        << (pass ? "PASS" : "FAIL") << "\n";
    return pass ? exit_code::ok : exit_code::verify_failed;
}

/// Repeated-trial error study; emits the report as JSON or CSV.
inline int cmd_experiment(const CliConfig& cfg, std::ostream& out = std::cout) {
    const DenseMatrix a = read_matrix_market(cfg.input_path);
    const double epsilon = detail::resolve_epsilon(cfg, a);
    if (cfg.trials < 1) throw UsageError("--trials must be positive");

    ExperimentReport report =
        run_experiment(a, epsilon, cfg.trials, cfg.seed,
                       PowerIterationConfig::defaults(a.dim()), cfg.input_path);

    std::string rendered;
    if (cfg.report_format == ReportFormat::json) {
        nlohmann::json doc = to_json(report);
        doc["config"] = {
            {"command", "experiment"},
            {"input", cfg.input_path},
            {"epsilon", *cfg.epsilon},
            {"epsilon_mode", cfg.epsilon_mode == EpsilonMode::absolute ? "absolute" : "relative"},
            {"seed", cfg.seed},
            {"trials", cfg.trials},
        };
        rendered = doc.dump(2) + "\n";
    } else {
        rendered = to_csv(report);
    }
    if (!cfg.output_path.empty())
        write_text_file(cfg.output_path, rendered);
    else
        out << rendered;

    out << "empirical_failure_rate " << detail::format_double(report.empirical_failure_rate)
        << "\n"
        << "theoretical_failure_bound "
        << detail::format_double(report.theoretical_failure_bound) << "\n";
    return exit_code::ok;
}

/// Second-moment diagnostics of a (thresholded) matrix: closed form vs
/// enumeration, agreement status, and the zero-mean check. Refuses n > 64,
/// where the enumeration oracle would be too expensive.
inline int cmd_moments(const CliConfig& cfg, std::ostream& out = std::cout) {
    DenseMatrix a = read_matrix_market(cfg.input_path);
    if (cfg.epsilon) {
        if (!(*cfg.epsilon > 0.0))
            throw std::invalid_argument("invalid accuracy parameter (epsilon must be positive)");
        a = threshold_zero(a, *cfg.epsilon);
    }
    const MomentDiagnostics diag = exact_second_moment(a);
    const double scale_ref = frobenius_norm(diag.closed_form_second_moment);
    const double dist =
        frobenius_norm(subtract(diag.closed_form_second_moment, diag.enumerated_second_moment));
    const double dist_t = frobenius_norm(subtract(diag.closed_form_second_moment_transposed,
                                                  diag.enumerated_second_moment_transposed));
    const bool agree = dist <= 1e-12 * scale_ref && dist_t <= 1e-12 * scale_ref;
    const bool zero_mean = verify_zero_mean(a);

    if (a.dim() <= 8) {
        out << "closed_form ";
        out << "[";
        for (std::size_t i = 0; i < a.dim(); ++i) {
            out << (i ? ",[" : "[");
            for (std::size_t j = 0; j < a.dim(); ++j)
                out << (j ? "," : "")
                    << detail::format_double(diag.closed_form_second_moment(i, j));
            out << "]";
        }
        out << "]\n";
    }
    out << "agreement " << (agree ? "OK" : "MISMATCH") << "\n"
        << "zero_mean " << (zero_mean ? "OK" : "MISMATCH") << "\n"
        << "gamma_realized " << detail::format_double(diag.gamma_realized) << "\n";

    if (!cfg.output_path.empty()) {
        nlohmann::json doc{
            {"n", a.dim()},
            {"row_nnz", diag.row_nnz},
            {"col_nnz", diag.col_nnz},
            {"closed_form_second_moment", matrix_to_json(diag.closed_form_second_moment)},
            {"enumerated_second_moment", matrix_to_json(diag.enumerated_second_moment)},
            {"closed_form_second_moment_transposed",
             matrix_to_json(diag.closed_form_second_moment_transposed)},
            {"enumerated_second_moment_transposed",
             matrix_to_json(diag.enumerated_second_moment_transposed)},
            {"gamma_realized", diag.gamma_realized},
            {"agreement_ok", agree},
            {"zero_mean_ok", zero_mean},
        };
        write_text_file(cfg.output_path, doc.dump(2) + "\n");
    }
    return agree && zero_mean ? exit_code::ok : exit_code::verify_failed;
}

/// Cross-field validation and dispatch; maps exception classes to the exit
/// code families. All commands are deterministic given (inputs, flags, seed).
inline int run_command(const CliConfig& cfg, std::ostream& out = std::cout,
                       std::ostream& err = std::cerr) {
    try {
        if (cfg.input_path.empty()) throw UsageError("--input is required");
        if (cfg.epsilon_mode == EpsilonMode::relative && cfg.command == Command::stream)
            throw UsageError("relative mode cannot stream: it needs ||A|| before the pass");
        if (cfg.s_override && *cfg.s_override < 1)
            throw UsageError("--samples must be positive");

        switch (cfg.command) {
            case Command::sparsify: return cmd_sparsify(cfg, out);
            case Command::stream: return cmd_stream(cfg, out);
            case Command::verify: return cmd_verify(cfg, out);
            case Command::experiment: return cmd_experiment(cfg, out);
            case Command::moments: return cmd_moments(cfg, out);
        }
        throw UsageError("unknown command");
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return exit_code::usage;
    } catch (const MatrixMarketError& e) {
        err << "io error: " << e.what() << "\n";
        return exit_code::io;
    } catch (const std::invalid_argument& e) {
        err << "validation error: " << e.what() << "\n";
        return exit_code::validation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::validation;
    }
}

} // namespace matsparse
