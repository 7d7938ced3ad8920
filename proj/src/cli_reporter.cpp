#include "hinfty/cli_reporter.hpp"

#include <Eigen/Core>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#ifndef HINFTY_VERSION
#define HINFTY_VERSION "unknown"
#endif

namespace fs = std::filesystem;

namespace hinf {

std::string to_string(SuiteType t) {
    switch (t) {
        case SuiteType::sector_equivalence: return "sector_equivalence";
        case SuiteType::strip_group: return "strip_group";
        case SuiteType::square_function_comparison: return "square_function_comparison";
        case SuiteType::g_function: return "g_function";
        case SuiteType::log_bridge: return "log_bridge";
    }
    return "unknown";
}

SuiteType suite_type_from_string(const std::string& s) {
    for (auto t : {SuiteType::sector_equivalence, SuiteType::strip_group, SuiteType::square_function_comparison,
                   SuiteType::g_function, SuiteType::log_bridge})
        if (to_string(t) == s) return t;
    throw ConfigInvalid("unknown suite type: " + s);
}

namespace {

void require_object(const json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigInvalid(where + " must be an object");
}

void allow_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    require_object(j, where);
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key)) throw ConfigInvalid("unknown key '" + key + "' in " + where);
}

void require_keys(const json& j, const std::set<std::string>& required, const std::string& where) {
    for (const auto& key : required)
        if (!j.contains(key)) throw ConfigInvalid("missing key '" + key + "' in " + where);
}

double read_number(const json& j, const std::string& where) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "pi") return kPi;
        if (s == "inf") return kInf;
    }
    throw ConfigInvalid(where + " must be a number");
}

double read_exponent(const json& j, const std::string& where) {
    const double p = read_number(j, where);
    if (!(p >= 1.0)) throw ConfigInvalid(where + " must satisfy p >= 1");
    return p;
}

std::uint64_t read_seed(const json& j, const std::string& where) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
        throw ConfigInvalid(where + " must be a non-negative integer");
    return j.get<std::uint64_t>();
}

Operator read_operator(const json& j, const std::string& where, const std::string& base_dir) {
    require_object(j, where);
    if (j.contains("file")) {
        allow_keys(j, {"file"}, where);
        fs::path path = j.at("file").get<std::string>();
        if (path.is_relative()) path = fs::path(base_dir) / path;
        std::ifstream in(path);
        if (!in) throw ConfigInvalid(where + ": cannot read " + path.string());
        json body;
        try {
            in >> body;
        } catch (const json::exception& e) {
            throw ConfigInvalid(where + ": " + e.what());
        }
        return read_operator(body, path.string(), base_dir);
    }
    allow_keys(j, {"re", "im", "dim", "diag_re", "diag_im"}, where);
    try {
        return Operator::from_json(j);
    } catch (const ConfigInvalid&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigInvalid(where + ": " + e.what());
    }
}

void check_function(const json& j, const std::string& where) {
    require_object(j, where);
    if (!j.contains("name") || !j.at("name").is_string()) throw ConfigInvalid(where + " needs a string 'name'");
    static const std::map<std::string, std::set<std::string>> keys{
        {"phi", {"name"}},
        {"sqrt_resolvent", {"name"}},
        {"power_ratio", {"name", "alpha", "beta"}},
        {"g_beta", {"name", "beta", "angle"}},
        {"rho", {"name", "n"}},
        {"rational", {"name", "zeros", "poles", "scale", "angle"}}};
    const auto known = keys.find(j.at("name").get<std::string>());
    if (known == keys.end()) throw ConfigInvalid(where + ": comparison functions are phi, sqrt_resolvent, power_ratio, g_beta, rho or rational");
    allow_keys(j, known->second, where);
    try {
        const HFunction f = make_function(j.at("name").get<std::string>(), j);
        if (f.domain != DomainKind::sector) throw ConfigInvalid(where + " must be a sector function");
    } catch (const ConfigInvalid&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigInvalid(where + ": " + e.what());
    }
}

LabOptions read_options(const json& j, LabOptions base, const std::string& where) {
    allow_keys(j, {"pack_size", "sweep_angles", "search_rounds", "random_vectors", "scale_factor", "budget"}, where);
    auto positive_int = [&](const char* key, int& dst, int lo) {
        if (!j.contains(key)) return;
        if (!j.at(key).is_number_integer() || j.at(key).get<long long>() < lo)
            throw ConfigInvalid(where + "." + key + " must be an integer >= " + std::to_string(lo));
        dst = j.at(key).get<int>();
    };
    positive_int("pack_size", base.pack_size, 1);
    positive_int("sweep_angles", base.sweep_angles, 1);
    positive_int("search_rounds", base.search_rounds, 0);
    positive_int("random_vectors", base.random_vectors, 0);
    if (j.contains("budget")) {
        if (!j.at("budget").is_number_integer() || j.at("budget").get<long long>() < 100)
            throw ConfigInvalid(where + ".budget must be an integer >= 100");
        base.budget = j.at("budget").get<long>();
    }
    if (j.contains("scale_factor")) {
        base.scale_factor = read_number(j.at("scale_factor"), where + ".scale_factor");
        if (!(base.scale_factor > 0.0) || std::isinf(base.scale_factor))
            throw ConfigInvalid(where + ".scale_factor must be positive");
    }
    return base;
}

SuiteJob read_suite(const json& j, std::size_t index, const std::map<std::string, Operator>& ops) {
    const std::string where = "suites[" + std::to_string(index) + "]";
    require_object(j, where);
    if (!j.contains("type") || !j.at("type").is_string()) throw ConfigInvalid(where + " needs a string 'type'");
    SuiteJob job;
    job.type = suite_type_from_string(j.at("type").get<std::string>());
    const std::set<std::string> common{"type", "name", "seed"};
    std::set<std::string> allowed = common, required;
    switch (job.type) {
        case SuiteType::sector_equivalence:
            allowed.insert({"operator", "p", "omega", "sigma"});
            required = {"operator", "p", "omega", "sigma"};
            break;
        case SuiteType::strip_group:
            allowed.insert({"operator", "p", "half_width"});
            required = {"operator", "p", "half_width"};
            break;
        case SuiteType::square_function_comparison:
            allowed.insert({"operator", "p", "psi", "phi"});
            required = {"operator", "p", "psi", "phi"};
            break;
        case SuiteType::g_function:
            allowed.insert({"torus_sizes", "p", "beta", "semigroup", "stability_tolerance"});
            required = {"torus_sizes", "p"};
            break;
        case SuiteType::log_bridge:
            allowed.insert({"operator", "p", "angle"});
            required = {"operator", "p"};
            break;
    }
    allow_keys(j, allowed, where);
    require_keys(j, required, where);

    job.name = j.value("name", to_string(job.type) + "_" + std::to_string(index));
    if (job.name.empty() || job.name.find_first_not_of("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-.") !=
                                std::string::npos)
        throw ConfigInvalid(where + ".name must use letters, digits, '_', '-' or '.'");
    if (j.contains("seed")) job.seed = read_seed(j.at("seed"), where + ".seed");

    json params = json::object();
    if (j.contains("operator")) {
        const std::string name = j.at("operator").is_string() ? j.at("operator").get<std::string>() : "";
        if (!ops.count(name)) throw ConfigInvalid(where + ".operator does not name a declared operator");
        params["operator"] = name;
    }
    if (job.type == SuiteType::g_function) {
        const json& sizes = j.at("torus_sizes");
        if (!sizes.is_array() || sizes.empty()) throw ConfigInvalid(where + ".torus_sizes must be a non-empty array");
        for (const auto& n : sizes)
            if (!n.is_number_integer() || n.get<long long>() < 4 || (n.get<long long>() & (n.get<long long>() - 1)) != 0)
                throw ConfigInvalid(where + ".torus_sizes must be powers of two >= 4");
        params["torus_sizes"] = sizes;
        json ps = j.at("p").is_array() ? j.at("p") : json::array({j.at("p")});
        json checked = json::array();
        for (const auto& p : ps) {
            const double v = read_exponent(p, where + ".p");
            if (!(v > 1.0) || std::isinf(v)) throw ConfigInvalid(where + ".p must lie in (1, inf)");
            checked.push_back(v);
        }
        params["p"] = checked;
        params["beta"] = j.contains("beta") ? read_number(j.at("beta"), where + ".beta") : 1.0;
        if (!(params["beta"].get<double>() > 0.0)) throw ConfigInvalid(where + ".beta must be positive");
        const std::string sg = j.value("semigroup", std::string("heat"));
        if (sg != "heat" && sg != "poisson") throw ConfigInvalid(where + ".semigroup must be heat or poisson");
        params["semigroup"] = sg;
        params["stability_tolerance"] =
            j.contains("stability_tolerance") ? read_number(j.at("stability_tolerance"), where + ".stability_tolerance") : 0.10;
    } else {
        const double p = read_exponent(j.at("p"), where + ".p");
        params["p"] = std::isinf(p) ? json("inf") : json(p);
    }
    for (const char* key : {"omega", "sigma", "half_width", "angle"})
        if (j.contains(key)) {
            const double v = read_number(j.at(key), where + "." + key);
            if (!(v > 0.0) || std::isinf(v)) throw ConfigInvalid(where + "." + key + " must be positive");
            params[key] = v;
        }
    for (const char* key : {"psi", "phi"})
        if (j.contains(key)) {
            check_function(j.at(key), where + "." + key);
            params[key] = j.at(key);
        }
    job.params = params;
    return job;
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_file(const fs::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    out << body;
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

SuiteReport run_job(const SuiteJob& job, const RunConfig& cfg, std::uint64_t seed) {
    LabOptions opts = cfg.options;
    opts.seed = seed;
    const json& p = job.params;
    auto space_for = [&](const Operator& a) {
        const double exponent = p.at("p").is_string() ? kInf : p.at("p").get<double>();
        return SpaceSpec(exponent, a.dim());
    };
    auto op = [&]() -> const Operator& { return cfg.operators.at(p.at("operator").get<std::string>()); };
    switch (job.type) {
        case SuiteType::sector_equivalence:
            return sector_equivalence_suite(op(), space_for(op()), p.at("omega"), p.at("sigma"), opts);
        case SuiteType::strip_group:
            return strip_group_suite(op(), space_for(op()), p.at("half_width"), opts);
        case SuiteType::square_function_comparison: {
            const HFunction psi = make_function(p.at("psi").at("name"), p.at("psi"));
            const HFunction phi = make_function(p.at("phi").at("name"), p.at("phi"));
            return square_function_comparison(op(), psi, phi, space_for(op()), opts);
        }
        case SuiteType::g_function:
            return g_function_sweep(p.at("torus_sizes").get<std::vector<int>>(), p.at("p").get<std::vector<double>>(),
                                    p.at("beta"), torus_semigroup_from_string(p.at("semigroup")), opts,
                                    p.at("stability_tolerance"));
        case SuiteType::log_bridge:
            return log_bridge_suite(op(), space_for(op()), p.value("angle", 0.0), opts);
    }
    throw ConfigInvalid("unknown suite type");
}

}  // namespace

RunConfig parse_run_config(const json& doc, const std::string& base_dir) {
    allow_keys(doc, {"seed", "output_dir", "options", "operators", "suites"}, "config");
    RunConfig cfg;
    if (doc.contains("seed")) cfg.seed = read_seed(doc.at("seed"), "seed");
    if (doc.contains("output_dir")) {
        if (!doc.at("output_dir").is_string()) throw ConfigInvalid("output_dir must be a string");
        cfg.output_dir = doc.at("output_dir").get<std::string>();
    }
    if (doc.contains("options")) cfg.options = read_options(doc.at("options"), cfg.options, "options");
    if (doc.contains("operators")) {
        require_object(doc.at("operators"), "operators");
        for (const auto& [name, body] : doc.at("operators").items())
            cfg.operators.emplace(name, read_operator(body, "operators." + name, base_dir));
    }
    if (doc.contains("suites")) {
        if (!doc.at("suites").is_array()) throw ConfigInvalid("suites must be an array");
        std::set<std::string> names;
        for (std::size_t i = 0; i < doc.at("suites").size(); ++i) {
            SuiteJob job = read_suite(doc.at("suites")[i], i, cfg.operators);
            if (!names.insert(job.name).second) throw ConfigInvalid("duplicate suite name: " + job.name);
            cfg.suites.push_back(std::move(job));
        }
    }
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigInvalid("cannot read config " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigInvalid(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_run_config(doc, fs::path(path).parent_path().string().empty() ? "." : fs::path(path).parent_path().string());
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, const RunConfig& cfg) {
    if (flag) return *flag;
    if (cfg.seed) return *cfg.seed;
    if (const char* env = std::getenv("LAB_SEED")) {
        try {
            std::size_t used = 0;
            const unsigned long long v = std::stoull(env, &used);
            if (used == std::string(env).size()) return v;
        } catch (const std::exception&) {
        }
        throw ConfigInvalid("LAB_SEED must be a non-negative integer");
    }
    return 1;
}

RunOutcome run_suites(const RunConfig& cfg, const RunSettings& settings) {
    const auto wall0 = std::chrono::steady_clock::now();
    const std::string started = utc_timestamp();
    const fs::path dir(settings.output_dir);
    fs::create_directories(dir);

    const std::size_t count = cfg.suites.size();
    std::vector<SuiteReport> reports(count);
    std::vector<std::string> errors(count);
    std::vector<std::uint64_t> seeds(count);
    for (std::size_t i = 0; i < count; ++i) seeds[i] = cfg.suites[i].seed.value_or(settings.seed + i);

    std::mutex write_lock;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            const SuiteJob& job = cfg.suites[i];
            try {
                reports[i] = run_job(job, cfg, seeds[i]);
            } catch (const std::exception& e) {
                errors[i] = e.what();
                reports[i].suite = to_string(job.type);
                reports[i].seeds = {seeds[i]};
                reports[i].details = json{{"error", e.what()}};
            }
            std::lock_guard<std::mutex> lock(write_lock);
            write_file(dir / (job.name + ".json"), reports[i].to_json().dump(2) + "\n");
            write_file(dir / (job.name + ".csv"), reports[i].to_csv());
        }
    };
    const int jobs = std::max(1, std::min<int>(settings.jobs, static_cast<int>(std::max<std::size_t>(count, 1))));
    std::vector<std::thread> pool;
    for (int w = 1; w < jobs; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    RunOutcome out;
    json suites = json::array();
    bool all_pass = true;
    for (std::size_t i = 0; i < count; ++i) {
        const bool ok = errors[i].empty() && reports[i].passed();
        all_pass = all_pass && ok;
        json entry{{"name", cfg.suites[i].name},
                   {"type", to_string(cfg.suites[i].type)},
                   {"seed", seeds[i]},
                   {"passed", ok},
                   {"checks", reports[i].checks.size()},
                   {"runtime_seconds", reports[i].runtime_seconds},
                   {"report", cfg.suites[i].name + ".json"},
                   {"csv", cfg.suites[i].name + ".csv"}};
        if (!errors[i].empty()) entry["error"] = errors[i];
        suites.push_back(entry);
    }
    out.exit_code = all_pass ? 0 : 1;
    out.manifest = json{
        {"tool", "lab"},
        {"versions",
         json{{"hinfty", HINFTY_VERSION},
              {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)},
              {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                                    "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
              {"compiler", __VERSION__}}},
        {"config", settings.config_path},
        {"seed", settings.seed},
        {"jobs", jobs},
        {"started_utc", started},
        {"finished_utc", utc_timestamp()},
        {"wall_clock_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count()},
        {"suites", suites},
        {"passed", all_pass}};
    write_file(dir / "manifest.json", out.manifest.dump(2) + "\n");
    out.reports = std::move(reports);
    return out;
}

std::string plot_csv(const SuiteReport& report) {
    std::string out = "series,x,y\n";
    for (const auto& [name, pts] : report.series)
        for (const auto& [x, y] : pts) out += name + "," + format_number(x) + "," + format_number(y) + "\n";
    return out;
}

SuiteReport load_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ReportMissing("no report at " + path);
    try {
        json j;
        in >> j;
        return SuiteReport::from_json(j);
    } catch (const json::exception& e) {
        throw ReportMissing("unreadable report " + path + ": " + e.what());
    }
}

}  // namespace hinf
