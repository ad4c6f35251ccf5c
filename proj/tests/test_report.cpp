#include <gtest/gtest.h>

#include <fstream>
#include <regex>

#include "support.hpp"
#include "typostrike/error.hpp"
#include "typostrike/report.hpp"

using namespace typostrike;

#ifndef TYPOSTRIKE_SCHEMA_DIR
#error "TYPOSTRIKE_SCHEMA_DIR must be defined"
#endif

namespace {

MetricsSummary summary_of(std::string condition, std::uint64_t n, std::uint64_t cc, std::uint64_t ac,
                          std::uint64_t ct, std::uint64_t at) {
  MetricsSummary s;
  s.condition = std::move(condition);
  s.n = n;
  s.clean_correct = cc;
  s.attack_correct = ac;
  s.clean_on_target = ct;
  s.attack_on_target = at;
  return s;
}

std::vector<ReportRow> sample_rows() {
  std::vector<ReportRow> rows;
  rows.push_back({"mma_bench", "visual", "mock:m:1", summary_of("audio", 10000, 7668, 6383, 0, 2427)});
  auto conf = summary_of("conflicting, \"quoted\"", 10, 9, 2, 0, 7);
  conf.conflict = ConflictCounts{4, 3};
  rows.push_back({"mma_bench", "audio", "mock:m:1", conf});
  auto aligned = summary_of("aligned", 7, 7, 1, 0, 5);
  aligned.redistribution = RedistributionCounts{1, 5, 1};
  rows.push_back({"dvd", "all", "mock:m:1", aligned});
  return rows;
}

// Minimal JSON Schema checker for the keywords the manifest schema uses.
void check_schema(const nlohmann::json& schema, const nlohmann::json& v, const std::string& path,
                  std::vector<std::string>& errors) {
  auto type_ok = [&](const std::string& t) {
    if (t == "object") return v.is_object();
    if (t == "array") return v.is_array();
    if (t == "string") return v.is_string();
    if (t == "integer") return v.is_number_integer();
    if (t == "number") return v.is_number();
    if (t == "boolean") return v.is_boolean();
    if (t == "null") return v.is_null();
    return false;
  };
  if (schema.contains("type")) {
    bool ok = false;
    if (schema["type"].is_array()) {
      for (const auto& t : schema["type"]) ok = ok || type_ok(t.get<std::string>());
    } else {
      ok = type_ok(schema["type"].get<std::string>());
    }
    if (!ok) {
      errors.push_back(path + ": wrong type");
      return;
    }
  }
  if (schema.contains("const") && v != schema["const"]) errors.push_back(path + ": const mismatch");
  if (schema.contains("enum") &&
      std::find(schema["enum"].begin(), schema["enum"].end(), v) == schema["enum"].end()) {
    errors.push_back(path + ": not in enum");
  }
  if (schema.contains("minimum") && v.is_number() && v.get<double>() < schema["minimum"].get<double>()) {
    errors.push_back(path + ": below minimum");
  }
  if (v.is_object()) {
    for (const auto& r : schema.value("required", nlohmann::json::array())) {
      if (!v.contains(r.get<std::string>())) errors.push_back(path + ": missing " + r.get<std::string>());
    }
    const auto props = schema.value("properties", nlohmann::json::object());
    for (const auto& [k, child] : v.items()) {
      if (props.contains(k)) {
        check_schema(props[k], child, path + "/" + k, errors);
      } else if (schema.contains("additionalProperties")) {
        const auto& extra = schema["additionalProperties"];
        if (extra.is_boolean()) {
          if (!extra.get<bool>()) errors.push_back(path + ": unexpected " + k);
        } else {
          check_schema(extra, child, path + "/" + k, errors);
        }
      }
    }
  }
  if (v.is_array() && schema.contains("items")) {
    for (std::size_t i = 0; i < v.size(); ++i) check_schema(schema["items"], v[i], path + "/" + std::to_string(i), errors);
  }
}

nlohmann::json load_schema() {
  std::ifstream in(std::string(TYPOSTRIKE_SCHEMA_DIR) + "/run_manifest.schema.json");
  return nlohmann::json::parse(in);
}

RunInfo sample_run() {
  RunInfo run;
  run.tool_version = std::string(kToolVersion);
  run.global_seed = 3;
  run.parallelism = 2;
  run.config_digest = std::string(64, 'a');
  run.dataset_manifest = "/data/manifest.jsonl";
  run.dataset_digest = std::string(64, 'b');
  run.items = 4;
  run.conditions = {"audio", "aligned"};
  run.providers["mllm"] = ProviderIdentity{"mock:transcript_follower_mllm", ""};
  run.providers["textgen"] = std::nullopt;
  run.stealth = StealthConfig{};
  run.rows = 8;
  run.ok_rows = 7;
  run.error_rows = 1;
  run.computed = 8;
  run.clean_calls = 4;
  run.attacked_calls = 8;
  run.results_path = "results.jsonl";
  run.results_digest = std::string(64, 'c');
  run.started_at = utc_timestamp();
  run.finished_at = utc_timestamp();
  return run;
}

}  // namespace

TEST(Csv, FieldQuoting) {
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  const auto t = parse_csv("a,\"b,c\",\"d\"\"e\"\r\n,x,\n");
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[0], (std::vector<std::string>{"a", "b,c", "d\"e"}));
  EXPECT_EQ(t[1], (std::vector<std::string>{"", "x", ""}));
  EXPECT_THROW(parse_csv("\"open"), DataError);
}

TEST(SummaryCsv, RoundTrip) {
  const auto rows = sample_rows();
  const std::string csv = emit_summary_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "dataset,modality,model,condition,n,acc_clean,acc_attack,acc_drop,"
                                           "asr_clean,asr_attack,asr_delta,clean_correct,attack_correct,"
                                           "clean_on_target,attack_on_target,asr_audio_target,asr_visual_target,"
                                           "audio_target_hits,visual_target_hits,redist_ground_truth,"
                                           "redist_injected_target,redist_other,redist_ground_truth_count,"
                                           "redist_injected_target_count,redist_other_count");
  EXPECT_EQ(parse_summary_csv(csv), rows);
}

TEST(SummaryCsv, HeadlineRow) {
  const std::string csv = emit_summary_csv({sample_rows()[0]});
  const auto t = parse_csv(csv);
  ASSERT_EQ(t.size(), 2u);
  const auto& cols = summary_csv_columns();
  auto col = [&](const std::string& name) {
    return t[1][static_cast<std::size_t>(std::find(cols.begin(), cols.end(), name) - cols.begin())];
  };
  EXPECT_EQ(col("acc_clean"), "76.68");
  EXPECT_EQ(col("acc_attack"), "63.83");
  EXPECT_EQ(col("acc_drop"), "12.85");
  EXPECT_EQ(col("asr_clean"), "0.00");
  EXPECT_EQ(col("asr_attack"), "24.27");
  EXPECT_EQ(col("asr_delta"), "+24.27");
  EXPECT_EQ(col("asr_audio_target"), "");
}

TEST(SummaryCsv, RejectsInconsistentDerivedColumns) {
  std::string csv = emit_summary_csv({sample_rows()[0]});
  const auto pos = csv.find("12.85");
  ASSERT_NE(pos, std::string::npos);
  csv.replace(pos, 5, "12.86");
  try {
    parse_summary_csv(csv);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("acc_drop"), std::string::npos);
  }
  EXPECT_THROW(parse_summary_csv("wrong,header\n"), DataError);
}

TEST(SummaryText, ShowsDropAndDelta) {
  const std::string text = emit_summary_text(sample_rows());
  EXPECT_NE(text.find("63.83 (12.85)"), std::string::npos);
  EXPECT_NE(text.find("24.27 (+24.27)"), std::string::npos);
  EXPECT_EQ(text.substr(0, 7), "dataset");
  EXPECT_THROW(parse_group_by("model"), UsageError);
}

TEST(SummaryJson, CarriesCounts) {
  const auto j = emit_summary_json(sample_rows());
  ASSERT_EQ(j.size(), 3u);
  EXPECT_EQ(j[0]["dataset"], "mma_bench");
  EXPECT_EQ(MetricsSummary::from_json(j[1]), sample_rows()[1].summary);
}

TEST(ReportRows, GroupsByModalityWithAllRow) {
  std::vector<ResultRow> results;
  for (int i = 0; i < 4; ++i) {
    ResultRow r;
    r.item_id = "i" + std::to_string(i);
    r.dataset_id = "mma_bench";
    r.model = "mock:m:1";
    r.condition = "audio";
    r.record.item_id = r.item_id;
    r.record.ground_truth = "cat";
    r.record.audio_target = "dog";
    r.record.condition = "audio";
    r.record.question_modality = i % 2 ? QuestionModality::visual : QuestionModality::audio;
    r.record.clean_prediction = "cat";
    r.record.attacked_prediction = i < 3 ? "dog" : "cat";
    results.push_back(r);
  }
  results[3].ok = false;
  const auto rows = order_rows(report_rows(results), GroupBy::dataset);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].modality, "visual");
  EXPECT_EQ(rows[0].summary.n, 1u);
  EXPECT_EQ(rows[1].modality, "audio");
  EXPECT_EQ(rows[1].summary.n, 2u);
  EXPECT_EQ(rows[2].modality, "all");
  EXPECT_EQ(rows[2].summary.asr_attack().str(), "100.00");
}

TEST(Tradeoff, CsvRows) {
  std::vector<FrontierPoint> pts(3);
  pts[0] = {"volume", "0.5", 75.5, {0.5, 0.0, 0.01, std::nullopt, 0.2}};
  pts[1] = {"volume", "2", 40.0, {2.0, 1.0, 0.1, 0.02, 0.3}};
  pts[2] = {"voice", "male, deep", 60.0, {}};
  const std::string csv = emit_tradeoff_csv(pts);
  const auto t = parse_csv(csv);
  ASSERT_EQ(t.size(), 4u);
  EXPECT_EQ(t[0], tradeoff_csv_columns());
  EXPECT_EQ(t[1][2], "75.5");
  EXPECT_EQ(t[1][6], "");
  EXPECT_EQ(t[3][1], "male, deep");
  for (const auto& row : t) EXPECT_EQ(row.size(), tradeoff_csv_columns().size());
}

TEST(Manifest, ProviderLabel) {
  EXPECT_EQ(provider_label({"mock:deterministic_tts", ""}), "mock:deterministic_tts:1");
  EXPECT_EQ(provider_label({"mock:deterministic_tts", "1"}), "mock:deterministic_tts:1");
  EXPECT_EQ(provider_label({"http:mllm:m1", "2024-05"}), "http:mllm:m1:2024-05");
  EXPECT_EQ(provider_label({"http:mllm:unversioned", ""}), "http:mllm:unversioned");
}

TEST(Manifest, ConformsToSchema) {
  const auto schema = load_schema();
  const auto m = emit_run_manifest(sample_run());
  std::vector<std::string> errors;
  check_schema(schema, nlohmann::json(m), "", errors);
  EXPECT_TRUE(errors.empty()) << errors.front();
  EXPECT_EQ(m["providers"]["mllm"], "mock:transcript_follower_mllm:1");
  EXPECT_TRUE(m["providers"]["textgen"].is_null());
  EXPECT_TRUE(std::regex_match(m["wall_clock"]["started_at"].get<std::string>(),
                               std::regex(R"(\d{4}-\d\d-\d\dT\d\d:\d\d:\d\dZ)")));

  RunInfo no_stealth = sample_run();
  no_stealth.stealth.reset();
  errors.clear();
  check_schema(schema, nlohmann::json(emit_run_manifest(no_stealth)), "", errors);
  EXPECT_TRUE(errors.empty());

  // The checker itself rejects a broken document.
  auto broken = nlohmann::json(m);
  broken.erase("counts");
  broken["extra"] = 1;
  broken["parallelism"] = 0;
  errors.clear();
  check_schema(schema, broken, "", errors);
  EXPECT_EQ(errors.size(), 3u);
}

TEST(SweepJson, RoundTrip) {
  SweepResult s;
  s.grid = {SweepAxis::volume, {"1"}};
  SweepPoint p;
  p.value = "1";
  p.condition.id = "v@volume=1";
  p.overall = summary_of("v@volume=1", 4, 4, 2, 0, 2);
  p.by_modality.emplace(QuestionModality::audio, summary_of("v@volume=1", 2, 2, 1, 0, 1));
  p.stealth.rel_rms = 1.0;
  s.points.push_back(p);
  const auto back = sweep_from_json(nlohmann::json(sweep_to_json(s)));
  ASSERT_EQ(back.points.size(), 1u);
  EXPECT_EQ(back.points[0].overall, p.overall);
  EXPECT_EQ(back.points[0].condition, p.condition);
  EXPECT_EQ(back.points[0].stealth.rel_rms, 1.0);
  EXPECT_FALSE(back.points[0].stealth.flatness_shift);
}
