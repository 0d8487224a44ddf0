#pragma once

#include "depctl/serialize.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace depctl {

enum class ExperimentKind { sample, capacity, tail, product_sum, orders, queue, condition_chain };

std::string kind_name(ExperimentKind k);
/// Accepts the config names and the CLI spellings "product-sum" and "chain".
ExperimentKind experiment_kind_from_name(const std::string& name);

/// `payload` holds the kind-specific fields; a "preset" entry names a
/// built-in payload, and any other fields override it.
struct ExperimentConfig {
    std::string name;
    ExperimentKind kind = ExperimentKind::sample;
    std::uint64_t seed = 0;
    Json payload = Json::object();
    std::string output_dir = ".";
};

ExperimentConfig config_from_json(const Json& j);
Json to_json(const ExperimentConfig& config);

/// Payload with the preset expanded.
Json resolve_payload(const ExperimentConfig& config);
/// 16 hex digits of FNV-1a over the canonical JSON of name, kind, seed and
/// resolved payload. The output directory is not part of the identity.
std::string config_hash(const ExperimentConfig& config);

std::vector<std::string> preset_names(ExperimentKind kind);
/// Throws SchemaError for an unknown name.
Json preset_payload(ExperimentKind kind, const std::string& name);

struct RunManifest {
    std::string name;
    std::string kind;
    std::string config_hash;
    std::string version;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string started;
    std::string finished;
    std::vector<std::string> outputs;
    /// holds, fails, inconclusive or completed.
    std::string verdict;
    std::string key_statistic;
    double value = 0.0;
    std::optional<double> ci_lo;
    std::optional<double> ci_hi;
};

Json to_json(const RunManifest& m);
RunManifest manifest_from_json(const Json& j);

/// Runs the experiment and writes <name>.json, <name>.csv (plus any extra
/// CSVs) and <name>.manifest.json into the output directory.
RunManifest run(const ExperimentConfig& config);

/// 0 for holds/completed, 2 for fails and inconclusive.
int exit_code(const RunManifest& m);

struct ReportRow {
    std::string name;
    std::string kind;
    std::string verdict;
    std::string key_statistic;
    double value = 0.0;
    std::optional<double> ci_lo;
    std::optional<double> ci_hi;
};

/// One row per manifest, sorted by name. Throws Error naming the manifest
/// when it or one of its listed outputs is missing.
std::vector<ReportRow> report(const std::vector<std::string>& manifest_paths);
std::string format_report(const std::vector<ReportRow>& rows);
void write_report_csv(const std::vector<ReportRow>& rows, const std::string& path);

} // namespace depctl
