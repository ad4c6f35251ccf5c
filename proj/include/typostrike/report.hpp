#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "typostrike/eval.hpp"
#include "typostrike/experiment.hpp"

namespace typostrike {

inline constexpr std::string_view kToolVersion = "0.1.0";

// One summary table row. `modality` is a question modality name or "all".
struct ReportRow {
  std::string dataset;
  std::string modality;
  std::string model;
  MetricsSummary summary;

  bool operator==(const ReportRow&) const = default;
};

enum class GroupBy { dataset, modality, condition };

std::string_view to_string(GroupBy g);
GroupBy parse_group_by(std::string_view name);

// Rows per (dataset, modality subset, model, condition) over the ok rows of
// a results stream, plus an "all" row per (dataset, model, condition).
std::vector<ReportRow> report_rows(const std::vector<ResultRow>& results);

// Stable order: by dataset then modality (dataset, modality grouping) or by
// condition first (condition grouping).
std::vector<ReportRow> order_rows(std::vector<ReportRow> rows, GroupBy group_by);

// Fixed CSV column order.
const std::vector<std::string>& summary_csv_columns();

std::string emit_summary_text(const std::vector<ReportRow>& rows, GroupBy group_by = GroupBy::dataset);
std::string emit_summary_csv(const std::vector<ReportRow>& rows);
nlohmann::ordered_json emit_summary_json(const std::vector<ReportRow>& rows);

// Inverse of emit_summary_csv. Rebuilds the counts and checks every derived
// percentage column against them.
std::vector<ReportRow> parse_summary_csv(std::string_view csv);

// RFC 4180 helpers.
std::string csv_field(std::string_view s);
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

const std::vector<std::string>& tradeoff_csv_columns();
std::string emit_tradeoff_csv(const std::vector<FrontierPoint>& points);

// Identity string for manifests; a missing version on a mock becomes
// "mock:<name>:1".
std::string provider_label(const ProviderIdentity& id);

struct RunInfo {
  std::string tool_version;
  std::uint64_t global_seed = 0;
  int parallelism = 1;
  std::string config_digest;
  std::string dataset_manifest;
  std::string dataset_digest;
  std::size_t items = 0;
  std::vector<std::string> conditions;
  std::map<std::string, std::optional<ProviderIdentity>> providers;  // kind -> identity
  double temperature = 0.0;
  std::optional<StealthConfig> stealth;
  std::size_t rows = 0;
  std::size_t ok_rows = 0;
  std::size_t error_rows = 0;
  std::size_t reused = 0;
  std::size_t computed = 0;
  std::size_t clean_calls = 0;
  std::size_t attacked_calls = 0;
  std::string results_path;
  std::string results_digest;
  std::string started_at;   // wall clock, ISO 8601
  std::string finished_at;
};

nlohmann::ordered_json emit_run_manifest(const RunInfo& run);

std::string utc_timestamp();

nlohmann::ordered_json stealth_means_json(const StealthMeans& m);
StealthMeans stealth_means_from_json(const nlohmann::json& j);
nlohmann::ordered_json sweep_to_json(const SweepResult& sweep);
SweepResult sweep_from_json(const nlohmann::json& j);

}  // namespace typostrike
