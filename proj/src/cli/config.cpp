#include "markedtime/cli/config.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace markedtime::cli {

namespace {

using nlohmann::json;

// Reads typed fields out of one JSON object, recording every problem.
class Reader {
public:
    Reader(const json& object, std::string where, std::vector<std::string>& problems)
        : object_(object), where_(std::move(where)), problems_(problems) {
        if (!object_.is_object()) problems_.push_back(where_ + ": expected an object");
    }

    ~Reader() {
        if (!object_.is_object()) return;
        for (const auto& [key, value] : object_.items())
            if (!known_.count(key)) problems_.push_back(where_ + ": unknown key \"" + key + "\"");
    }

    template <class T>
    void get(const std::string& key, T& out) {
        known_.insert(key);
        if (!object_.is_object() || !object_.contains(key)) return;
        const json& v = object_.at(key);
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) return fail(key, "a boolean");
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) return fail(key, "an integer");
            if constexpr (std::is_unsigned_v<T>) {
                if (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)
                    return fail(key, "a non-negative integer");
            }
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) return fail(key, "a number");
        } else {
            if (!v.is_string()) return fail(key, "a string");
        }
        out = v.get<T>();
    }

    const json* child(const std::string& key) {
        known_.insert(key);
        if (!object_.is_object() || !object_.contains(key)) return nullptr;
        return &object_.at(key);
    }

    std::string path(const std::string& key) const { return where_ + "." + key; }

private:
    void fail(const std::string& key, const char* what) { problems_.push_back(path(key) + ": expected " + what); }

    const json& object_;
    std::string where_;
    std::vector<std::string>& problems_;
    std::set<std::string> known_;
};

std::optional<OutputFormat> parse_format(const std::string& s) {
    if (s == "csv") return OutputFormat::csv;
    if (s == "json") return OutputFormat::json;
    return std::nullopt;
}

std::vector<DensityProbe> parse_probes(const json& list, const std::string& where, std::vector<std::string>& problems) {
    std::vector<DensityProbe> out;
    if (!list.is_array()) {
        problems.push_back(where + ": expected an array of probes");
        return out;
    }
    for (std::size_t i = 0; i < list.size(); ++i) {
        DensityProbe p;
        Reader r(list[i], where + "[" + std::to_string(i) + "]", problems);
        r.get("t", p.state.t);
        r.get("b", p.state.b);
        r.get("n_left", p.state.n_left);
        r.get("n", p.state.n);
        r.get("x1", p.mark.x1);
        r.get("k", p.mark.k);
        out.push_back(p);
    }
    return out;
}

void probe_problems(const MarketSpec& spec, const std::vector<DensityProbe>& probes, const std::string& where,
                    bool need_continuous, std::vector<std::string>& out) {
    for (std::size_t i = 0; i < probes.size(); ++i) {
        const auto& p = probes[i];
        const std::string at = where + "[" + std::to_string(i) + "]";
        if (!(p.state.t >= 0.0)) out.push_back(at + ": t must be >= 0");
        if (!(p.state.t < spec.T_prime))
            out.push_back(at + ": t = " + std::to_string(p.state.t) + " is not before T' = " +
                          std::to_string(spec.T_prime) + " (the density is only defined for t < T')");
        if (p.state.n_left < 0 || p.state.n < p.state.n_left) out.push_back(at + ": need 0 <= n_left <= n");
        if (p.state.t == 0.0 && (p.state.n != 0 || p.state.b != 0.0)) out.push_back(at + ": at t = 0, b and n must be 0");
        if (!(p.mark.x1 > 0.0)) out.push_back(at + ": x1 must be > 0");
        if (p.mark.k < 0) out.push_back(at + ": k must be >= 0");
        if (need_continuous) {
            if (p.state.n_left != p.state.n) out.push_back(at + ": drift probes need n_left == n");
            if (p.mark.k < p.state.n) out.push_back(at + ": drift probes need k >= n");
        }
    }
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
    std::vector<std::string> problems;
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError({std::string("config is not valid JSON: ") + e.what()});
    }

    RunConfig c;
    {
        Reader r(root, "config", problems);
        r.get("experiment", c.experiment);
        r.get("n_paths", c.run.n_paths);
        r.get("n_steps", c.run.n_steps);
        r.get("seed", c.run.master_seed);
        r.get("bridge_correction", c.run.bridge_correction);
        r.get("crn", c.run.crn);
        r.get("workers", c.run.workers);

        if (const json* m = r.child("market")) {
            Reader mr(*m, r.path("market"), problems);
            mr.get("sigma", c.run.spec.sigma);
            mr.get("lambda", c.run.spec.lambda);
            mr.get("barrier", c.run.spec.barrier);
            mr.get("T", c.run.spec.T);
            mr.get("T_prime", c.run.spec.T_prime);
            mr.get("x0", c.run.spec.x0);
            mr.get("horizon_margin", c.run.spec.horizon_margin);
        }
        if (const json* o = r.child("output")) {
            Reader orr(*o, r.path("output"), problems);
            std::string dir = c.out_dir.string();
            orr.get("dir", dir);
            c.out_dir = dir;
            if (const json* f = orr.child("formats")) {
                if (!f->is_array()) {
                    problems.push_back("config.output.formats: expected an array");
                } else {
                    c.formats.clear();
                    for (const auto& item : *f) {
                        const auto fmt = item.is_string() ? parse_format(item.get<std::string>()) : std::nullopt;
                        if (!fmt)
                            problems.push_back("config.output.formats: entries must be \"csv\" or \"json\"");
                        else
                            c.formats.push_back(*fmt);
                    }
                }
            }
        }
        if (const json* e = r.child("estimate")) {
            Reader er(*e, r.path("estimate"), problems);
            er.get("strategy", c.estimate.strategy);
            if (const json* pi = er.child("pi")) {
                if (!pi->is_array() || pi->size() != 2 || !(*pi)[0].is_number() || !(*pi)[1].is_number())
                    problems.push_back("config.estimate.pi: expected [pi1, pi2]");
                else
                    c.estimate.pi = {(*pi)[0].get<double>(), (*pi)[1].get<double>()};
            }
        }
        if (const json* o = r.child("optimize")) {
            Reader orr(*o, r.path("optimize"), problems);
            orr.get("grid_steps", c.optimize.grid_steps);
            orr.get("epsilon", c.optimize.epsilon);
            orr.get("stationarity", c.optimize.stationarity);
            if (const json* b = orr.child("box")) {
                bool ok = b->is_array() && b->size() == 4;
                for (std::size_t i = 0; ok && i < 4; ++i) ok = (*b)[i].is_number();
                if (!ok)
                    problems.push_back("config.optimize.box: expected [lo1, hi1, lo2, hi2]");
                else
                    c.optimize.box = {(*b)[0].get<double>(), (*b)[1].get<double>(), (*b)[2].get<double>(),
                                      (*b)[3].get<double>()};
            }
        }
        if (const json* d = r.child("density")) {
            Reader dr(*d, r.path("density"), problems);
            dr.get("check_density", c.density.check_density);
            dr.get("check_drift", c.density.check_drift);
            dr.get("samples", c.density.samples);
            dr.get("tolerance", c.density.tolerance);
            dr.get("drift_samples", c.density.drift_samples);
            dr.get("drift_h", c.density.drift_h);
            if (const json* p = dr.child("probes")) c.density.probes = parse_probes(*p, dr.path("probes"), problems);
            if (const json* p = dr.child("drift_probes"))
                c.density.drift_probes = parse_probes(*p, dr.path("drift_probes"), problems);
        }
        if (const json* l = r.child("lab")) {
            Reader lr(*l, r.path("lab"), problems);
            lr.get("models", c.lab.n_models);
            lr.get("seed", c.lab.seed);
            lr.get("max_steps", c.lab.max_steps);
            lr.get("max_marks", c.lab.max_marks);
            lr.get("zero_kernel_entry", c.lab.zero_kernel_entry);
            std::string arithmetic = c.lab.rational ? "rational" : "double";
            lr.get("arithmetic", arithmetic);
            if (arithmetic != "rational" && arithmetic != "double")
                problems.push_back("config.lab.arithmetic: must be \"rational\" or \"double\"");
            c.lab.rational = arithmetic == "rational";
        }
    }
    c.parse_problems = std::move(problems);
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError({"cannot read config file " + path.string()});
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::vector<std::string> RunConfig::problems() const {
    auto out = parse_problems;
    const auto runp = run.problems();
    out.insert(out.end(), runp.begin(), runp.end());
    if (experiment.empty()) out.push_back("experiment name must not be empty");
    for (char ch : experiment)
        if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-' || ch == '.')) {
            out.push_back("experiment name may only contain letters, digits, '_', '-' and '.'");
            break;
        }
    if (formats.empty()) out.push_back("at least one output format is required");
    if (estimate.strategy != "ordinary" && estimate.strategy != "insider" && estimate.strategy != "constant")
        out.push_back("estimate.strategy must be ordinary, insider or constant");
    if (optimize.grid_steps < 2) out.push_back("optimize.grid_steps must be >= 2");
    if (!(optimize.box.lo1 < optimize.box.hi1 && optimize.box.lo2 < optimize.box.hi2))
        out.push_back("optimize.box must have lo < hi on both axes");
    if (!(optimize.epsilon >= 0.0)) out.push_back("optimize.epsilon must be >= 0");
    if (density.samples < 2) out.push_back("density.samples must be >= 2");
    if (density.drift_samples < 2) out.push_back("density.drift_samples must be >= 2");
    if (!(density.tolerance > 0.0)) out.push_back("density.tolerance must be > 0");
    if (!(density.drift_h > 0.0)) out.push_back("density.drift_h must be > 0");
    if (command == "density-check") {
        if (density_probes(*this).empty()) out.push_back("no density probe lies before T'");
        probe_problems(run.spec, density.probes, "density.probes", false, out);
        probe_problems(run.spec, density.drift_probes, "density.drift_probes", true, out);
        for (const auto& p : density.drift_probes)
            if (p.state.t + density.drift_h >= run.spec.T_prime) {
                out.push_back("density.drift_probes: t + drift_h must stay below T'");
                break;
            }
    }
    if (lab.n_models < 0) out.push_back("lab.models must be >= 0");
    if (lab.max_steps < 1 || lab.max_steps > lab::kMaxSteps)
        out.push_back("lab.max_steps must lie in 1.." + std::to_string(lab::kMaxSteps));
    if (lab.max_marks < 1 || lab.max_marks > lab::kMaxMarks)
        out.push_back("lab.max_marks must lie in 1.." + std::to_string(lab::kMaxMarks));
    return out;
}

void RunConfig::validate() const {
    auto p = problems();
    if (!p.empty()) throw ValidationError(std::move(p));
}

RunConfig finalize_config(RunConfig config, const Overrides& o, const std::string& command) {
    std::vector<std::string> problems;
    config.command = command;
    if (config.experiment.empty()) {
        config.experiment = command;
        for (char& ch : config.experiment)
            if (ch == ' ') ch = '_';
    }
    if (o.seed) config.run.master_seed = *o.seed;
    if (o.paths) config.run.n_paths = *o.paths;
    if (o.steps) config.run.n_steps = *o.steps;
    if (o.out) config.out_dir = *o.out;
    if (o.workers) config.run.workers = *o.workers;
    if (o.format) {
        const auto fmt = parse_format(*o.format);
        if (!fmt)
            problems.push_back("--format must be csv or json");
        else
            config.formats = {*fmt};
    }
    config.lab.workers = config.run.workers;
    if (o.no_bridge) config.run.bridge_correction = false;
    if (o.no_crn) config.run.crn = false;
    auto rest = config.problems();
    problems.insert(problems.end(), rest.begin(), rest.end());
    if (!problems.empty()) throw ValidationError(problems);
    return config;
}

std::vector<DensityProbe> density_probes(const RunConfig& config) {
    if (!config.density.probes.empty()) return config.density.probes;
    std::vector<DensityProbe> out;
    for (const auto& p : default_density_probes())
        if (p.state.t < config.run.spec.T_prime) out.push_back(p);
    return out;
}

std::vector<DensityProbe> drift_probes(const RunConfig& config) {
    if (!config.density.drift_probes.empty()) return config.density.drift_probes;
    std::vector<DensityProbe> out;
    for (const auto& p : density_probes(config)) {
        if (out.size() == 5) break;
        if (p.state.t > 0.0 && p.state.n_left == p.state.n && p.mark.k >= p.state.n &&
            p.state.t + config.density.drift_h < config.run.spec.T_prime)
            out.push_back(p);
    }
    return out;
}

}  // namespace markedtime::cli
