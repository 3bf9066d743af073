#include "isac/harness.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace isac::bench {

using nlohmann::json;

namespace {

const std::set<std::string> kKnownKeys = {
    "experiment",  "algorithm",      "n_t",        "n_r",
    "n_u",         "frame_len",      "frame_len_grid", "snr_db",
    "snr_grid",    "sigma_s_dbm",    "sigma_c_dbm",    "n_realizations",
    "seeds",       "batch_size",     "schedule_a", "schedule_b",
    "beta1",       "beta2",          "eps0",       "rho0",
    "growth",      "xi0",            "tau0",       "t_max",
    "stop_eps",    "r_max",          "tau",        "j_max",
    "r0_fraction", "r0_grid",        "out_dir"};

[[noreturn]] void fail(const std::string& key, const std::string& what) {
    throw ConfigError("config: " + key + ": " + what);
}

double as_number(const json& doc, const std::string& key, double fallback) {
    if (!doc.contains(key)) return fallback;
    const json& v = doc.at(key);
    if (!v.is_number()) fail(key, "expected a number");
    return v.get<double>();
}

int as_int(const json& doc, const std::string& key, int fallback) {
    if (!doc.contains(key)) return fallback;
    const json& v = doc.at(key);
    if (!v.is_number_integer()) fail(key, "expected an integer");
    return v.get<int>();
}

std::string as_string(const json& doc, const std::string& key,
                      const std::string& fallback) {
    if (!doc.contains(key)) return fallback;
    const json& v = doc.at(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
}

template <typename T>
std::vector<T> as_grid(const json& doc, const std::string& scalar_key,
                       const std::string& grid_key, bool integral) {
    if (doc.contains(scalar_key) && doc.contains(grid_key))
        fail(grid_key, "conflicts with " + scalar_key);
    std::vector<T> out;
    if (doc.contains(scalar_key)) {
        const json& v = doc.at(scalar_key);
        if (!v.is_number() || (integral && !v.is_number_integer()))
            fail(scalar_key, integral ? "expected an integer"
                                      : "expected a number");
        out.push_back(v.get<T>());
    } else if (doc.contains(grid_key)) {
        const json& v = doc.at(grid_key);
        if (!v.is_array()) fail(grid_key, "expected an array");
        if (v.empty()) fail(grid_key, "must not be empty");
        for (const json& e : v) {
            if (!e.is_number() || (integral && !e.is_number_integer()))
                fail(grid_key, integral ? "expected integers"
                                        : "expected numbers");
            out.push_back(e.get<T>());
        }
    }
    return out;
}

std::vector<int> desk_frame_grid(const std::string& experiment) {
    if (experiment == "cov-error")
        return {64, 128, 256, 512, 1024, 2048, 4096};
    if (experiment == "asymptotic-L") return {8, 32, 128, 512};
    if (experiment == "sensing-sweep") return {6, 8, 16};
    if (experiment == "hsnr-check") return {10};
    if (experiment == "isac-framelen") return {16, 32, 64, 128};
    return {8};
}

std::vector<int> full_frame_grid(const std::string& experiment) {
    if (experiment == "cov-error")
        return {64, 128, 256, 512, 1024, 2048, 4096, 8192};
    if (experiment == "asymptotic-L") return {40, 64, 128, 512};
    if (experiment == "sensing-sweep") return {40, 64, 128};
    if (experiment == "isac-framelen") return {40, 64, 128};
    return {40};
}

std::vector<double> desk_snr_grid(const std::string& experiment) {
    if (experiment == "sensing-sweep") return {0.0, 8.0, 16.0, 24.0};
    if (experiment == "hsnr-check") return {16.0, 24.0, 32.0};
    if (experiment == "convergence") return {10.0};
    return {16.0};
}

std::vector<double> desk_r0_grid(const std::string& experiment) {
    if (experiment == "isac-tradeoff") return {0.0, 0.25, 0.5, 0.75, 1.0};
    return {0.5};
}

void check_positive(double v, const std::string& key) {
    if (!(v > 0.0)) fail(key, "must be positive");
}

}  // namespace

double ExperimentConfig::sigma_s2() const {
    return std::pow(10.0, sigma_s_dbm / 10.0);
}

double ExperimentConfig::sigma_c2() const {
    return std::pow(10.0, sigma_c_dbm / 10.0);
}

double ExperimentConfig::power(double snr_db) const {
    return sigma_s2() * std::pow(10.0, snr_db / 10.0);
}

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = {
        "cov-error",  "asymptotic-L", "convergence",   "sensing-sweep",
        "hsnr-check", "isac-tradeoff", "isac-framelen"};
    return names;
}

ExperimentConfig parse_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
    for (const auto& item : doc.items())
        if (!kKnownKeys.count(item.key()))
            fail(item.key(), "unknown key");

    ExperimentConfig cfg;
    cfg.experiment = as_string(doc, "experiment", "");
    const auto& names = experiment_names();
    if (std::find(names.begin(), names.end(), cfg.experiment) == names.end())
        fail("experiment", cfg.experiment.empty() ? "missing"
                                                  : "unknown experiment");

    cfg.algorithm = as_string(doc, "algorithm", cfg.algorithm);
    if (cfg.algorithm != "sgp" && cfg.algorithm != "mb-sgp")
        fail("algorithm", "expected \"sgp\" or \"mb-sgp\"");

    cfg.n_t = as_int(doc, "n_t", cfg.n_t);
    cfg.n_r = as_int(doc, "n_r", cfg.n_r);
    cfg.n_u = as_int(doc, "n_u", cfg.n_u);
    if (cfg.n_t < 1) fail("n_t", "must be at least 1");
    if (cfg.n_r < 1) fail("n_r", "must be at least 1");
    if (cfg.n_u < 1) fail("n_u", "must be at least 1");

    cfg.frame_len_grid =
        as_grid<int>(doc, "frame_len", "frame_len_grid", true);
    if (cfg.frame_len_grid.empty())
        cfg.frame_len_grid = desk_frame_grid(cfg.experiment);
    for (int L : cfg.frame_len_grid)
        if (L < 1) fail("frame_len_grid", "frame lengths must be at least 1");

    cfg.snr_grid = as_grid<double>(doc, "snr_db", "snr_grid", false);
    if (cfg.snr_grid.empty()) cfg.snr_grid = desk_snr_grid(cfg.experiment);
    for (double s : cfg.snr_grid)
        if (!std::isfinite(s)) fail("snr_grid", "values must be finite");

    cfg.sigma_s_dbm = as_number(doc, "sigma_s_dbm", cfg.sigma_s_dbm);
    cfg.sigma_c_dbm = as_number(doc, "sigma_c_dbm", cfg.sigma_c_dbm);
    if (!std::isfinite(cfg.sigma_s_dbm)) fail("sigma_s_dbm", "must be finite");
    if (!std::isfinite(cfg.sigma_c_dbm)) fail("sigma_c_dbm", "must be finite");

    cfg.n_realizations = as_int(doc, "n_realizations", cfg.n_realizations);
    if (cfg.n_realizations < 1) fail("n_realizations", "must be at least 1");
    cfg.batch_size = as_int(doc, "batch_size", cfg.batch_size);
    if (cfg.batch_size < 1) fail("batch_size", "must be at least 1");

    if (doc.contains("seeds")) {
        const json& v = doc.at("seeds");
        if (!v.is_array()) fail("seeds", "expected an array");
        cfg.seeds.clear();
        for (const json& e : v) {
            if (!e.is_number_integer() || e.get<double>() < 0)
                fail("seeds", "expected non-negative integers");
            cfg.seeds.push_back(e.get<std::uint64_t>());
        }
    }
    if (cfg.seeds.empty()) fail("seeds", "must not be empty");

    cfg.schedule.a = as_number(doc, "schedule_a", cfg.schedule.a);
    cfg.schedule.b = as_number(doc, "schedule_b", cfg.schedule.b);
    check_positive(cfg.schedule.a, "schedule_a");
    check_positive(cfg.schedule.b, "schedule_b");

    cfg.betas.beta1 = as_number(doc, "beta1", cfg.betas.beta1);
    cfg.betas.beta2 = as_number(doc, "beta2", cfg.betas.beta2);
    cfg.betas.eps0 = as_number(doc, "eps0", cfg.betas.eps0);
    if (cfg.betas.beta1 < 0.0 || cfg.betas.beta1 >= 1.0)
        fail("beta1", "must lie in [0, 1)");
    if (cfg.betas.beta2 < 0.0 || cfg.betas.beta2 >= 1.0)
        fail("beta2", "must lie in [0, 1)");
    check_positive(cfg.betas.eps0, "eps0");

    cfg.penalty.rho0 = as_number(doc, "rho0", cfg.penalty.rho0);
    cfg.penalty.growth = as_number(doc, "growth", cfg.penalty.growth);
    cfg.penalty.xi0 = as_number(doc, "xi0", cfg.penalty.xi0);
    cfg.penalty.tau0 = as_number(doc, "tau0", cfg.penalty.tau0);
    cfg.penalty.t_max = as_int(doc, "t_max", cfg.penalty.t_max);
    check_positive(cfg.penalty.rho0, "rho0");
    if (!(cfg.penalty.growth > 1.0)) fail("growth", "must exceed 1");
    check_positive(cfg.penalty.xi0, "xi0");
    check_positive(cfg.penalty.tau0, "tau0");
    if (cfg.penalty.t_max < 1) fail("t_max", "must be at least 1");

    cfg.sgd_stop.eps = as_number(doc, "stop_eps", cfg.sgd_stop.eps);
    cfg.sgd_stop.r_max = as_int(doc, "r_max", cfg.sgd_stop.r_max);
    check_positive(cfg.sgd_stop.eps, "stop_eps");
    if (cfg.sgd_stop.r_max < 1) fail("r_max", "must be at least 1");

    cfg.sca_stop.tau = as_number(doc, "tau", cfg.sca_stop.tau);
    cfg.sca_stop.j_max = as_int(doc, "j_max", cfg.sca_stop.j_max);
    if (!std::isfinite(cfg.sca_stop.tau)) fail("tau", "must be finite");
    if (cfg.sca_stop.j_max < 1) fail("j_max", "must be at least 1");

    cfg.r0_grid = as_grid<double>(doc, "r0_fraction", "r0_grid", false);
    if (cfg.r0_grid.empty()) cfg.r0_grid = desk_r0_grid(cfg.experiment);
    // Attribute range errors to whichever key the user actually wrote.
    const char* r0_key = doc.contains("r0_fraction") ? "r0_fraction" : "r0_grid";
    for (double f : cfg.r0_grid)
        if (!(f >= 0.0 && f <= 1.0))
            fail(r0_key, "fractions must lie in [0, 1]");

    cfg.out_dir = as_string(doc, "out_dir", cfg.out_dir);
    if (cfg.out_dir.empty()) fail("out_dir", "must not be empty");

    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

void apply_full_scale(ExperimentConfig& cfg) {
    cfg.n_t = 32;
    cfg.n_r = 32;
    if (cfg.frame_len_grid == desk_frame_grid(cfg.experiment))
        cfg.frame_len_grid = full_frame_grid(cfg.experiment);
}

namespace {

bool type_matches(const json& v, const std::string& type) {
    if (type == "object") return v.is_object();
    if (type == "array") return v.is_array();
    if (type == "string") return v.is_string();
    if (type == "number") return v.is_number();
    if (type == "integer") return v.is_number_integer();
    if (type == "boolean") return v.is_boolean();
    if (type == "null") return v.is_null();
    return false;
}

void validate_node(const json& doc, const json& schema,
                   const std::string& path) {
    if (schema.contains("type")) {
        const json& t = schema.at("type");
        bool ok = false;
        if (t.is_string()) {
            ok = type_matches(doc, t.get<std::string>());
        } else {
            for (const json& alt : t)
                ok = ok || type_matches(doc, alt.get<std::string>());
        }
        if (!ok)
            throw ConfigError("record: " + path + ": expected type " +
                              t.dump());
    }
    if (schema.contains("enum")) {
        bool ok = false;
        for (const json& alt : schema.at("enum")) ok = ok || (alt == doc);
        if (!ok)
            throw ConfigError("record: " + path + ": value not in enum");
    }
    if (doc.is_object()) {
        if (schema.contains("required"))
            for (const json& k : schema.at("required"))
                if (!doc.contains(k.get<std::string>()))
                    throw ConfigError("record: " + path +
                                      ": missing required key " +
                                      k.get<std::string>());
        const json props =
            schema.contains("properties") ? schema.at("properties") : json::object();
        for (const auto& item : doc.items()) {
            const std::string child = path + "/" + item.key();
            if (props.contains(item.key())) {
                validate_node(item.value(), props.at(item.key()), child);
            } else if (schema.contains("additionalProperties")) {
                const json& ap = schema.at("additionalProperties");
                if (ap.is_boolean() && !ap.get<bool>())
                    throw ConfigError("record: " + child +
                                      ": unexpected key");
                if (ap.is_object()) validate_node(item.value(), ap, child);
            }
        }
    }
    if (doc.is_array()) {
        if (schema.contains("minItems") &&
            doc.size() < schema.at("minItems").get<std::size_t>())
            throw ConfigError("record: " + path + ": too few items");
        if (schema.contains("items")) {
            std::size_t i = 0;
            for (const json& e : doc)
                validate_node(e, schema.at("items"),
                              path + "/" + std::to_string(i++));
        }
    }
}

json load_json_file(const std::string& path, const char* label) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError(std::string(label) + ": cannot open " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError(std::string(label) + ": invalid JSON in " + path +
                          ": " + e.what());
    }
    return doc;
}

}  // namespace

void validate_record_file(const std::string& record_path,
                          const std::string& schema_path) {
    const json record = load_json_file(record_path, "record");
    const json schema = load_json_file(schema_path, "schema");
    validate_node(record, schema, "");
}

}  // namespace isac::bench
