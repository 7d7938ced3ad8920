#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "hinfty/cli_reporter.hpp"

using namespace hinf;
namespace fs = std::filesystem;

namespace {

std::string lab_binary() {
    const char* bin = std::getenv("LAB_BIN");
    return bin ? bin : "./lab";
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("hinfty_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_json(const fs::path& dir, const std::string& name, const json& body) {
    const fs::path path = dir / name;
    std::ofstream(path) << body.dump(2);
    return path;
}

int run_lab(const std::string& args) {
    const std::string cmd = lab_binary() + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json calibration_config() {
    return json{{"operators", {{"diag14", {{"diag_re", {1.0, 4.0}}}}}},
                {"options", {{"pack_size", 20}, {"sweep_angles", 3}}},
                {"suites", json::array({json{{"name", "calibration"},
                                             {"type", "sector_equivalence"},
                                             {"operator", "diag14"},
                                             {"p", 2},
                                             {"omega", "pi"},
                                             {"sigma", 2.0}}})}};
}

}  // namespace

TEST_CASE("schema rejects unknown keys, bad exponents and dangling operators") {
    CHECK_NOTHROW(parse_run_config(calibration_config()));
    json extra = calibration_config();
    extra["colour"] = "blue";
    CHECK_THROWS_AS(parse_run_config(extra), ConfigInvalid);
    json suite_extra = calibration_config();
    suite_extra["suites"][0]["tolerance"] = 1.0;
    CHECK_THROWS_AS(parse_run_config(suite_extra), ConfigInvalid);
    json bad_p = calibration_config();
    bad_p["suites"][0]["p"] = 0.5;
    CHECK_THROWS_AS(parse_run_config(bad_p), ConfigInvalid);
    json dangling = calibration_config();
    dangling["suites"][0]["operator"] = "missing";
    CHECK_THROWS_AS(parse_run_config(dangling), ConfigInvalid);
    json duplicate = calibration_config();
    duplicate["suites"].push_back(duplicate["suites"][0]);
    CHECK_THROWS_AS(parse_run_config(duplicate), ConfigInvalid);
    json bad_torus = json{{"suites", json::array({json{{"type", "g_function"}, {"torus_sizes", {48}}, {"p", 2}}})}};
    CHECK_THROWS_AS(parse_run_config(bad_torus), ConfigInvalid);
    json bad_fn = calibration_config();
    bad_fn["suites"][0] = json{{"type", "square_function_comparison"}, {"operator", "diag14"}, {"p", 2},
                               {"psi", {{"name", "phi"}, {"alpha", 1}}}, {"phi", {{"name", "phi"}}}};
    CHECK_THROWS_AS(parse_run_config(bad_fn), ConfigInvalid);
}

TEST_CASE("seed precedence: flag, config, environment, default") {
    RunConfig cfg = parse_run_config(calibration_config());
    unsetenv("LAB_SEED");
    CHECK(resolve_seed(std::nullopt, cfg) == 1);
    setenv("LAB_SEED", "42", 1);
    CHECK(resolve_seed(std::nullopt, cfg) == 42);
    cfg.seed = 5;
    CHECK(resolve_seed(std::nullopt, cfg) == 5);
    CHECK(resolve_seed(9, cfg) == 9);
    cfg.seed.reset();
    setenv("LAB_SEED", "nope", 1);
    CHECK_THROWS_AS(resolve_seed(std::nullopt, cfg), ConfigInvalid);
    unsetenv("LAB_SEED");
}

TEST_CASE("empty suite list writes only the manifest and exits 0") {
    const fs::path dir = scratch("empty");
    const fs::path cfg = write_json(dir, "empty.json", json{{"suites", json::array()}});
    CHECK(run_lab("run " + cfg.string() + " --out " + (dir / "out").string()) == 0);
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(dir / "out")) files.push_back(e.path().filename().string());
    REQUIRE(files.size() == 1);
    CHECK(files[0] == "manifest.json");
    const json manifest = json::parse(slurp(dir / "out" / "manifest.json"));
    CHECK(manifest.at("passed").get<bool>());
    CHECK(manifest.at("versions").contains("eigen"));
    CHECK(manifest.contains("started_utc"));
}

TEST_CASE("calibration config passes with a unit two-sided constant") {
    const fs::path dir = scratch("calibration");
    const fs::path cfg = write_json(dir, "cal.json", calibration_config());
    CHECK(run_lab("run " + cfg.string() + " --out " + (dir / "out").string() + " --seed 3") == 0);
    const SuiteReport r = load_report((dir / "out" / "calibration.json").string());
    CHECK(r.constant("C3_two_sided") == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.seeds.at(0) == 3);
    const std::string csv = slurp(dir / "out" / "calibration.csv");
    CHECK(csv.rfind("suite,check,lhs,rhs,margin,pass\n", 0) == 0);
    CHECK(csv.find(",false\n") == std::string::npos);
}

TEST_CASE("invalid exponent exits 2 before any report is written") {
    const fs::path dir = scratch("invalid");
    json cfg = calibration_config();
    cfg["suites"][0]["p"] = 0.5;
    const fs::path path = write_json(dir, "bad.json", cfg);
    CHECK(run_lab("run " + path.string() + " --out " + (dir / "out").string()) == 2);
    CHECK_FALSE(fs::exists(dir / "out"));
    CHECK(run_lab("run " + (dir / "absent.json").string()) == 2);
}

TEST_CASE("failing assertion exits 1 and still writes the reports") {
    const fs::path dir = scratch("failing");
    // Stability tolerance 0 cannot hold for the sampled p = 3 constants.
    json cfg{{"suites", json::array({json{{"name", "g"},
                                          {"type", "g_function"},
                                          {"torus_sizes", {16, 32}},
                                          {"p", {3}},
                                          {"stability_tolerance", 0.0}}})},
             {"options", {{"budget", 2000}}}};
    const fs::path path = write_json(dir, "fail.json", cfg);
    CHECK(run_lab("run " + path.string() + " --out " + (dir / "out").string()) == 1);
    CHECK(fs::exists(dir / "out" / "g.json"));
    CHECK(fs::exists(dir / "out" / "g.csv"));
    CHECK(slurp(dir / "out" / "g.csv").find(",false\n") != std::string::npos);
}

TEST_CASE("plot emits long-format series and a header for empty reports") {
    const fs::path dir = scratch("plot");
    const fs::path cfg = write_json(dir, "cal.json", calibration_config());
    REQUIRE(run_lab("run " + cfg.string() + " --out " + (dir / "out").string()) == 0);
    CHECK(run_lab("plot " + (dir / "out" / "calibration.json").string() + " --out " + (dir / "series.csv").string()) == 0);
    const std::string csv = slurp(dir / "series.csv");
    CHECK(csv.rfind("series,x,y\n", 0) == 0);
    // Three sweep angles per series, two series.
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 * 3);

    SuiteReport empty;
    empty.suite = "empty";
    CHECK(plot_csv(empty) == "series,x,y\n");
    CHECK_THROWS_AS(load_report((dir / "nothing.json").string()), ReportMissing);
    CHECK(run_lab("plot " + (dir / "nothing.json").string()) == 2);
}

TEST_CASE("same seed gives byte-identical csv across runs and job counts") {
    const fs::path dir = scratch("determinism");
    json cfg{{"operators", {{"tri", {{"re", {{1.0, 0.5}, {0.0, 3.0}}}}}}},
             {"options", {{"pack_size", 10}, {"sweep_angles", 2}, {"budget", 2000}}},
             {"suites", json::array({json{{"name", "s3"}, {"type", "sector_equivalence"}, {"operator", "tri"}, {"p", 3},
                                          {"omega", 2.0}, {"sigma", 1.5}},
                                     json{{"name", "g"}, {"type", "g_function"}, {"torus_sizes", {16}}, {"p", {1.5}}}})}};
    const fs::path path = write_json(dir, "det.json", cfg);
    REQUIRE(run_lab("run " + path.string() + " --out " + (dir / "a").string() + " --seed 11") == 0);
    REQUIRE(run_lab("run " + path.string() + " --out " + (dir / "b").string() + " --seed 11 --jobs 2") == 0);
    for (const char* f : {"s3.csv", "g.csv"}) CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
}
