#pragma once

#include "depctl/channel.hpp"
#include "depctl/dependence.hpp"
#include "depctl/orders.hpp"
#include "depctl/queueing.hpp"
#include "depctl/tail_lab.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <initializer_list>
#include <string>
#include <vector>

namespace depctl {

using Json = nlohmann::json;

/// Finite values as numbers; inf, -inf and nan as the strings "inf", "-inf", "nan".
Json number(double v);
/// Inverse of `number`; `field` names the value in error messages.
double to_double(const Json& j, const std::string& field);

/// Strict field access for config documents. Every error is a SchemaError
/// whose message starts with the dotted field path.
namespace schema {
void require_object(const Json& j, const std::string& field);
void reject_unknown(const Json& j, const std::string& field, std::initializer_list<const char*> allowed);
const Json& member(const Json& j, const std::string& key, const std::string& field);
double number_at(const Json& j, const std::string& key, const std::string& field);
double number_or(const Json& j, const std::string& key, double fallback, const std::string& field);
std::size_t count_at(const Json& j, const std::string& key, const std::string& field);
std::size_t count_or(const Json& j, const std::string& key, std::size_t fallback, const std::string& field);
bool bool_or(const Json& j, const std::string& key, bool fallback, const std::string& field);
std::string string_at(const Json& j, const std::string& key, const std::string& field);
} // namespace schema

Json to_json(const DistributionSpec& spec);
DistributionSpec distribution_from_json(const Json& j, const std::string& field = "dist");

/// `default_dim` fills a missing "dim".
Json to_json(const CopulaSpec& spec);
CopulaSpec copula_from_json(const Json& j, std::size_t default_dim, const std::string& field = "copula");

Json to_json(const ProcessSpec& spec);
ProcessSpec process_from_json(const Json& j, const std::string& field = "process");

Json to_json(const ChannelModel& model);
ChannelModel channel_model_from_json(const Json& j, const std::string& field = "model");

Json to_json(const CapacityParams& params);
CapacityParams capacity_params_from_json(const Json& j, const std::string& field = "params");

Json to_json(const QueueConfig& config);
QueueConfig queue_config_from_json(const Json& j, const std::string& field = "queue");

Json to_json(const LightTailResult& r);
Json to_json(const RatioCurve& c);
Json to_json(const CompositionReport& r);
Json to_json(const ClosureReport& r);
Json to_json(const ConditionReport& r);
Json to_json(const StopLossCurve& c);
Json to_json(const OrderVerdict& v);
Json to_json(const PartialSumReport& r);
Json to_json(const StrengthReport& r);
Json to_json(const BiasReport& r);
Json to_json(const RandomSumReport& r);
Json to_json(const BacklogStats& s);
Json to_json(const PowerTradeReport& r);

/// CSV with a header row, LF line endings and %.17g numbers.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);
    ~CsvWriter();
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

    void row(const std::vector<double>& values);
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
    std::FILE* file_ = nullptr;
    std::size_t width_ = 0;
};

std::string format_number(double v);

/// Long-format dump with columns path, t, coord, value.
void write_csv(const PathMatrix& m, const std::string& path);

} // namespace depctl
