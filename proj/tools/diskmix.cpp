// Command line front end: run experiments, list the registry, run the
// invariant suite.
//
// Exit codes: 0 success, 1 configuration or I/O error, 2 a configured
// acceptance check failed.

#include "diskmix/diskmix.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

int run_command(const std::string& config_path, const std::string& experiment, const std::string& output_dir, bool quiet) {
    diskmix::ExperimentConfig cfg =
        experiment.empty() ? diskmix::load_config(config_path) : diskmix::registered_config(experiment);
    if (!output_dir.empty()) cfg.output_dir = output_dir;
    std::cerr << "running " << cfg.experiment_id << " with " << diskmix::thread_count() << " thread(s)\n";
    diskmix::ProgressSink sink;
    if (!quiet) sink = [](const std::string& line) { std::cerr << "  " << line << '\n'; };
    const auto report = diskmix::run_experiment(cfg, sink);
    diskmix::emit_report(report, cfg.output_dir);
    for (const auto& s : report.slopes) {
        std::cout << "slope " << s.metric << (s.kappa ? "@" + diskmix::format_number(*s.kappa) : "") << ": "
                  << (s.fit ? diskmix::format_number(s.fit->slope) : "n/a") << " [" << s.status << "]\n";
    }
    for (const auto& c : report.checks) std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    std::cout << "report written to " << cfg.output_dir << '\n';
    return report.passed() ? 0 : 2;
}

int list_command(const std::string& write_dir) {
    for (const auto& e : diskmix::experiment_registry()) {
        std::cout << e.id << "  " << e.description << '\n';
        if (write_dir.empty()) continue;
        std::filesystem::create_directories(write_dir);
        const auto path = std::filesystem::path(write_dir) / (e.id + ".json");
        std::ofstream out(path);
        if (!out) throw diskmix::Error("cannot write " + path.string());
        auto j = e.config;
        j["$schema"] = "experiment.schema.json";
        out << j.dump(2) << '\n';
    }
    return 0;
}

int verify_command() {
    bool all = true;
    for (const auto& c : diskmix::run_invariant_suite()) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
        all = all && c.passed;
    }
    return all ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Shear-flow mixing diagnostics on the unit disk"};
    app.require_subcommand(1);

    std::string config_path, experiment, output_dir;
    bool quiet = false;
    auto* run = app.add_subcommand("run", "Run one experiment and write its report");
    auto* source = run->add_option_group("source");
    source->add_option("--config", config_path, "Experiment configuration (JSON)")->check(CLI::ExistingFile);
    source->add_option("--experiment", experiment, "Registered experiment id (see list-experiments)");
    source->require_option(1);
    run->add_option("--output-dir", output_dir, "Override the configured output directory");
    run->add_flag("--quiet", quiet, "Suppress per-time progress lines");

    std::string write_dir;
    auto* list = app.add_subcommand("list-experiments", "List the built-in experiments");
    list->add_option("--write-configs", write_dir, "Also write each configuration as JSON into this directory");

    auto* verify = app.add_subcommand("verify", "Run the invariant suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*run) return run_command(config_path, experiment, output_dir, quiet);
        if (*list) return list_command(write_dir);
        if (*verify) return verify_command();
    } catch (const diskmix::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
