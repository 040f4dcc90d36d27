#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "markedtime/cli/config.hpp"

namespace markedtime::cli {

/// One estimator against one closed-form value. Missing closed forms carry
/// an empty label and NaN value; z_score is NaN unless se > 0.
struct ResultRow {
    std::string run_id;
    std::string experiment;
    std::string estimator;
    std::int64_t n_paths = 0;
    int n_steps = 0;
    std::uint64_t seed = 0;
    double mean = 0.0;
    double se = 0.0;
    std::string closed_form_label;
    double closed_form_value = 0.0;
    double z_score = 0.0;
};

/// Builds a row with z = (mean - value) / se and a run_id hashed from the
/// experiment, estimator and run parameters.
ResultRow make_row(const RunConfig& config, const std::string& estimator, std::int64_t n_paths, int n_steps,
                   std::uint64_t seed, double mean, double se, const std::string& label, double value);

const std::vector<std::string>& csv_columns();

/// Shortest round-trip text of a double ("nan", "inf" and "-inf" for the
/// special values).
std::string format_number(double v);

std::string to_csv(const std::vector<ResultRow>& rows);
nlohmann::ordered_json to_json(const std::vector<ResultRow>& rows);

/// Writes <out>/<experiment>.csv and/or .json. The JSON file holds the rows
/// plus `extra` under "details". Returns the written paths.
std::vector<std::filesystem::path> write_results(const RunConfig& config, const std::vector<ResultRow>& rows,
                                                 const nlohmann::ordered_json& extra);

/// Writes `text` to <out>/<name>, creating the directory.
std::filesystem::path write_text(const RunConfig& config, const std::string& name, const std::string& text);

std::string fnv1a_hex(const std::string& text);

}  // namespace markedtime::cli
