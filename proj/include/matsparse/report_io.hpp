#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "analysis.hpp"
#include "dense_matrix.hpp"
#include "matrix_market.hpp"
#include "sparsify.hpp"

namespace matsparse {

inline nlohmann::json to_json(const ExperimentReport& r) {
    return nlohmann::json{
        {"matrix", {{"label", r.matrix_label}, {"n", r.n}}},
        {"epsilon", r.epsilon},
        {"threshold", r.threshold},
        {"frobenius_norm_squared", r.frob_norm_sq},
        {"samples", r.samples},
        {"trials", r.trials},
        {"seeds", r.seeds},
        {"per_trial_errors", r.per_trial_errors},
        {"empirical_failure_rate", r.empirical_failure_rate},
        {"theoretical_failure_bound", r.theoretical_failure_bound},
        {"gamma_realized_max", r.gamma_realized_max},
        {"gamma_bound", r.gamma_bound},
        {"wall_time_seconds", r.wall_time_seconds},
    };
}

/// One row per trial; `pass` means the measured error stayed within epsilon.
inline std::string to_csv(const ExperimentReport& r) {
    std::ostringstream out;
    out << "trial,seed,samples,error,pass\n";
    for (std::size_t t = 0; t < r.per_trial_errors.size(); ++t)
        out << t << "," << r.seeds[t] << "," << r.samples << ","
            << detail::format_double(r.per_trial_errors[t]) << ","
            << (r.per_trial_errors[t] > r.epsilon ? "fail" : "pass") << "\n";
    return out.str();
}

/// Sketch provenance sidecar written next to the coordinate file.
inline nlohmann::json sketch_sidecar(const SparseSketch& sketch, double epsilon) {
    return nlohmann::json{
        {"n", sketch.n},
        {"s", sketch.samples},
        {"epsilon", epsilon},
        {"seed", sketch.seed},
        {"threshold", epsilon / (2.0 * static_cast<double>(sketch.n))},
    };
}

inline nlohmann::json matrix_to_json(const DenseMatrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < m.dim(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t j = 0; j < m.dim(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw MatrixMarketError(path + ": cannot open for writing");
    out << content;
    if (!out) throw MatrixMarketError(path + ": write failed");
}

} // namespace matsparse
