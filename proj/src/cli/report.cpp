#include "markedtime/cli/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace markedtime::cli {

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ResultRow make_row(const RunConfig& config, const std::string& estimator, std::int64_t n_paths, int n_steps,
                   std::uint64_t seed, double mean, double se, const std::string& label, double value) {
    ResultRow r;
    r.experiment = config.experiment;
    r.estimator = estimator;
    r.n_paths = n_paths;
    r.n_steps = n_steps;
    r.seed = seed;
    r.mean = mean;
    r.se = se;
    r.closed_form_label = label;
    r.closed_form_value = value;
    r.z_score = se > 0.0 ? (mean - value) / se : std::nan("");
    const auto& s = config.run.spec;
    r.run_id = fnv1a_hex(config.experiment + "|" + estimator + "|" + std::to_string(n_paths) + "|" +
                         std::to_string(n_steps) + "|" + std::to_string(seed) + "|" + format_number(s.sigma) + "|" +
                         format_number(s.lambda) + "|" + format_number(s.barrier) + "|" + format_number(s.T) + "|" +
                         format_number(s.T_prime) + "|" + format_number(s.x0) + "|" +
                         (config.run.bridge_correction ? "bridge" : "nobridge") + "|" +
                         (config.run.crn ? "crn" : "nocrn"));
    return r;
}

const std::vector<std::string>& csv_columns() {
    static const std::vector<std::string> cols{"run_id", "experiment",        "estimator",         "n_paths",
                                               "n_steps", "seed",             "mean",              "se",
                                               "closed_form_label", "closed_form_value", "z_score"};
    return cols;
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

nlohmann::ordered_json number_or_null(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

void create_out_dir(const RunConfig& config) {
    std::error_code ec;
    std::filesystem::create_directories(config.out_dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + config.out_dir.string() + ": " + ec.message());
}

}  // namespace

std::string to_csv(const std::vector<ResultRow>& rows) {
    std::string out;
    const auto& cols = csv_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
    out += "\n";
    for (const auto& r : rows) {
        out += csv_field(r.run_id) + "," + csv_field(r.experiment) + "," + csv_field(r.estimator) + "," +
               std::to_string(r.n_paths) + "," + std::to_string(r.n_steps) + "," + std::to_string(r.seed) + "," +
               format_number(r.mean) + "," + format_number(r.se) + "," + csv_field(r.closed_form_label) + "," +
               format_number(r.closed_form_value) + "," + format_number(r.z_score) + "\n";
    }
    return out;
}

nlohmann::ordered_json to_json(const std::vector<ResultRow>& rows) {
    auto out = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        nlohmann::ordered_json j;
        j["run_id"] = r.run_id;
        j["experiment"] = r.experiment;
        j["estimator"] = r.estimator;
        j["n_paths"] = r.n_paths;
        j["n_steps"] = r.n_steps;
        j["seed"] = r.seed;
        j["mean"] = number_or_null(r.mean);
        j["se"] = number_or_null(r.se);
        j["closed_form_label"] = r.closed_form_label;
        j["closed_form_value"] = number_or_null(r.closed_form_value);
        j["z_score"] = number_or_null(r.z_score);
        out.push_back(j);
    }
    return out;
}

std::filesystem::path write_text(const RunConfig& config, const std::string& name, const std::string& text) {
    create_out_dir(config);
    const auto path = config.out_dir / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path.string());
    return path;
}

std::vector<std::filesystem::path> write_results(const RunConfig& config, const std::vector<ResultRow>& rows,
                                                 const nlohmann::ordered_json& extra) {
    std::vector<std::filesystem::path> written;
    for (auto fmt : config.formats) {
        if (fmt == OutputFormat::csv) {
            written.push_back(write_text(config, config.experiment + ".csv", to_csv(rows)));
        } else {
            nlohmann::ordered_json doc;
            doc["experiment"] = config.experiment;
            doc["rows"] = to_json(rows);
            if (!extra.is_null()) doc["details"] = extra;
            written.push_back(write_text(config, config.experiment + ".json", doc.dump(2) + "\n"));
        }
    }
    return written;
}

}  // namespace markedtime::cli
