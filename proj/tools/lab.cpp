// lab: batch runner for the experiment suites.
//   lab run <config.json> [--out DIR] [--seed N] [--jobs K]
//   lab plot <report.json> [--out FILE]
// Exit codes: 0 all assertions hold, 1 an assertion failed, 2 invalid input.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "hinfty/cli_reporter.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Experiment runner for sectorial operator suites"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::optional<std::uint64_t> seed;
    int jobs = 1;
    auto* run = app.add_subcommand("run", "Run every suite in a JSON config");
    run->add_option("config", config_path, "Run configuration")->required();
    run->add_option("--out", out_dir, "Output directory (default: config output_dir or lab_out)");
    run->add_option("--seed", seed, "Base seed (default: config seed, then LAB_SEED, then 1)");
    run->add_option("--jobs", jobs, "Worker threads for independent suites")->check(CLI::PositiveNumber);

    std::string report_path, plot_out;
    auto* plot = app.add_subcommand("plot", "Emit long-format series CSV from a report");
    plot->add_option("report", report_path, "Report JSON written by 'lab run'")->required();
    plot->add_option("--out", plot_out, "Write to a file instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*run) {
            const hinf::RunConfig cfg = hinf::load_run_config(config_path);
            hinf::RunSettings settings;
            settings.config_path = config_path;
            settings.output_dir = !out_dir.empty() ? out_dir : !cfg.output_dir.empty() ? cfg.output_dir : "lab_out";
            settings.seed = hinf::resolve_seed(seed, cfg);
            settings.jobs = jobs;
            const hinf::RunOutcome outcome = hinf::run_suites(cfg, settings);
            for (const auto& s : outcome.manifest.at("suites")) {
                std::cout << (s.at("passed").get<bool>() ? "PASS " : "FAIL ") << s.at("name").get<std::string>();
                if (s.contains("error")) std::cout << " (" << s.at("error").get<std::string>() << ")";
                std::cout << "\n";
            }
            std::cout << "reports in " << settings.output_dir << "\n";
            if (outcome.exit_code != 0) {
                std::cerr << "lab: " << hinf::AssertionFailed("at least one suite assertion failed").what() << "\n";
            }
            return outcome.exit_code;
        }
        const std::string csv = hinf::plot_csv(hinf::load_report(report_path));
        if (plot_out.empty()) {
            std::cout << csv;
        } else {
            std::ofstream out(plot_out, std::ios::binary);
            out << csv;
            if (!out) throw std::runtime_error("cannot write " + plot_out);
        }
        return 0;
    } catch (const hinf::ConfigInvalid& e) {
        std::cerr << "lab: invalid config: " << e.what() << "\n";
        return 2;
    } catch (const hinf::ReportMissing& e) {
        std::cerr << "lab: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "lab: " << e.what() << "\n";
        return 2;
    }
}
