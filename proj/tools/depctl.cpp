#include "depctl/errors.hpp"
#include "depctl/harness.hpp"
#include "depctl/parallel.hpp"

#include <CLI11/CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

using depctl::Json;

Json parse_json_text(const std::string& text, const std::string& what) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw depctl::SchemaError(what + ": " + e.what());
    }
}

Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw depctl::Error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return parse_json_text(os.str(), path);
}

/// Inline JSON, or @path to read it from a file.
Json payload_argument(const std::string& arg) {
    if (!arg.empty() && arg[0] == '@') return load_json_file(arg.substr(1));
    return parse_json_text(arg, "--payload");
}

struct Globals {
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> out;
};

struct KindCommand {
    depctl::ExperimentKind kind;
    CLI::App* app = nullptr;
    std::string preset;
    std::string payload;
    std::string name;
    bool list = false;
};

void print_manifest(const depctl::RunManifest& m, const std::string& dir) {
    std::cout << m.name << ": " << m.verdict;
    if (!m.key_statistic.empty()) {
        std::cout << "  " << m.key_statistic << " = " << depctl::format_number(m.value);
        if (m.ci_lo && m.ci_hi)
            std::cout << " [" << depctl::format_number(*m.ci_lo) << ", " << depctl::format_number(*m.ci_hi) << "]";
    }
    std::cout << "\n  manifest: " << dir << "/" << m.name << ".manifest.json\n";
}

int run_config(depctl::ExperimentConfig config, const Globals& g) {
    if (g.out) config.output_dir = *g.out;
    const auto m = depctl::run(config);
    print_manifest(m, config.output_dir);
    return depctl::exit_code(m);
}

int run_kind(const KindCommand& cmd, const Globals& g) {
    if (cmd.list) {
        for (const auto& name : depctl::preset_names(cmd.kind)) std::cout << name << "\n";
        return 0;
    }
    if (!g.seed) throw depctl::SchemaError("--seed: required (runs are never seeded from the clock)");
    if (cmd.preset.empty() && cmd.payload.empty())
        throw depctl::SchemaError("one of --preset and --payload is required");
    depctl::ExperimentConfig config;
    config.kind = cmd.kind;
    config.seed = *g.seed;
    config.payload = cmd.payload.empty() ? Json::object() : payload_argument(cmd.payload);
    if (!config.payload.is_object()) throw depctl::SchemaError("payload: expected an object");
    if (!cmd.preset.empty()) config.payload["preset"] = cmd.preset;
    config.name = !cmd.name.empty() ? cmd.name
                  : !cmd.preset.empty() ? depctl::kind_name(cmd.kind) + "-" + cmd.preset
                                        : depctl::kind_name(cmd.kind);
    return run_config(std::move(config), g);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo toolkit for dependence, tails and stochastic orders in fading-channel queues"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", std::string(DEPCTL_VERSION));

    Globals g;
    std::uint64_t seed = 0;
    int threads = 0;
    std::string out;
    auto* seed_opt = app.add_option("--seed", seed, "Master seed (64-bit)");
    auto* threads_opt = app.add_option("--threads", threads, "Worker threads (default: DEPCTL_THREADS or all cores)")
                            ->check(CLI::PositiveNumber);
    auto* out_opt = app.add_option("--out", out, "Output directory");

    std::vector<KindCommand> kinds;
    const std::vector<std::pair<std::string, depctl::ExperimentKind>> names{
        {"sample", depctl::ExperimentKind::sample},
        {"capacity", depctl::ExperimentKind::capacity},
        {"tail", depctl::ExperimentKind::tail},
        {"product-sum", depctl::ExperimentKind::product_sum},
        {"orders", depctl::ExperimentKind::orders},
        {"queue", depctl::ExperimentKind::queue},
        {"chain", depctl::ExperimentKind::condition_chain},
    };
    kinds.reserve(names.size());
    for (const auto& [name, kind] : names) {
        KindCommand& cmd = kinds.emplace_back();
        cmd.kind = kind;
        cmd.app = app.add_subcommand(name, "Run an experiment of kind " + depctl::kind_name(kind));
        cmd.app->add_option("--preset", cmd.preset, "Built-in payload");
        cmd.app->add_option("--payload", cmd.payload, "Payload JSON, or @file; fields override the preset");
        cmd.app->add_option("--name", cmd.name, "Experiment name (output file stem)");
        cmd.app->add_flag("--list-presets", cmd.list, "Print preset names and exit");
    }

    auto* exp = app.add_subcommand("exp", "Config-file experiments");
    exp->require_subcommand(1);
    auto* exp_run = exp->add_subcommand("run", "Run an experiment config file");
    std::string config_path;
    exp_run->add_option("file", config_path, "Config JSON")->required();

    auto* report_cmd = app.add_subcommand("report", "Summarize run manifests");
    std::vector<std::string> manifests;
    std::string report_csv;
    report_cmd->add_option("manifests", manifests, "Manifest files");
    report_cmd->add_option("--csv", report_csv, "Also write the table as CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (*seed_opt) g.seed = seed;
    if (*threads_opt) g.threads = threads;
    if (*out_opt) g.out = out;
    if (g.threads) depctl::set_worker_threads(*g.threads);

    try {
        for (const auto& cmd : kinds)
            if (cmd.app->parsed()) return run_kind(cmd, g);
        if (exp_run->parsed()) {
            auto config = depctl::config_from_json(load_json_file(config_path));
            if (g.seed) config.seed = *g.seed;
            return run_config(std::move(config), g);
        }
        if (report_cmd->parsed()) {
            const auto rows = depctl::report(manifests);
            std::cout << depctl::format_report(rows);
            if (!report_csv.empty()) depctl::write_report_csv(rows, report_csv);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
