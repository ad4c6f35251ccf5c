#include "typostrike/report.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <set>
#include <sstream>

#include "typostrike/error.hpp"

namespace typostrike {

using ojson = nlohmann::ordered_json;

std::string_view to_string(GroupBy g) {
  switch (g) {
    case GroupBy::dataset: return "dataset";
    case GroupBy::modality: return "modality";
    case GroupBy::condition: return "condition";
  }
  return "dataset";
}

GroupBy parse_group_by(std::string_view name) {
  for (auto g : {GroupBy::dataset, GroupBy::modality, GroupBy::condition}) {
    if (to_string(g) == name) return g;
  }
  throw UsageError("--group-by must be dataset, modality or condition");
}

std::vector<ReportRow> report_rows(const std::vector<ResultRow>& results) {
  // key: dataset, modality, model, condition
  using Key = std::tuple<std::string, std::string, std::string, std::string>;
  std::map<Key, std::vector<EvalRecord>> groups;
  std::vector<Key> order;
  auto add = [&](Key k, const EvalRecord& r) {
    auto [it, fresh] = groups.try_emplace(k);
    if (fresh) order.push_back(k);
    it->second.push_back(r);
  };
  for (const auto& row : results) {
    if (!row.ok) continue;
    add({row.dataset_id, std::string(to_string(row.record.question_modality)), row.model, row.condition}, row.record);
    add({row.dataset_id, "all", row.model, row.condition}, row.record);
  }
  std::vector<ReportRow> out;
  for (const auto& k : order) {
    out.push_back({std::get<0>(k), std::get<1>(k), std::get<2>(k), compute_metrics(groups[k])});
  }
  return out;
}

namespace {

int modality_rank(const std::string& m) {
  if (m == "visual") return 0;
  if (m == "audio") return 1;
  if (m == "audio_visual") return 2;
  if (m == "all") return 4;
  return 3;
}

}  // namespace

std::vector<ReportRow> order_rows(std::vector<ReportRow> rows, GroupBy group_by) {
  auto key = [&](const ReportRow& r) {
    switch (group_by) {
      case GroupBy::dataset:
        return std::make_tuple(r.dataset, modality_rank(r.modality), r.modality, r.model, r.summary.condition);
      case GroupBy::modality:
        return std::make_tuple(std::string{}, modality_rank(r.modality), r.modality + "\n" + r.dataset, r.model,
                               r.summary.condition);
      case GroupBy::condition:
        return std::make_tuple(r.summary.condition, modality_rank(r.modality), r.dataset + "\n" + r.modality, r.model,
                               std::string{});
    }
    return std::make_tuple(std::string{}, 0, std::string{}, std::string{}, std::string{});
  };
  std::stable_sort(rows.begin(), rows.end(), [&](const ReportRow& a, const ReportRow& b) { return key(a) < key(b); });
  return rows;
}

const std::vector<std::string>& summary_csv_columns() {
  static const std::vector<std::string> cols = {
      "dataset",          "modality",          "model",           "condition",        "n",
      "acc_clean",        "acc_attack",        "acc_drop",        "asr_clean",        "asr_attack",
      "asr_delta",        "clean_correct",     "attack_correct",  "clean_on_target",  "attack_on_target",
      "asr_audio_target", "asr_visual_target", "audio_target_hits", "visual_target_hits",
      "redist_ground_truth", "redist_injected_target", "redist_other",
      "redist_ground_truth_count", "redist_injected_target_count", "redist_other_count"};
  return cols;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, field_started = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && field.empty()) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      field_started = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (field_started || !field.empty() || !row.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      field_started = false;
    } else {
      field += c;
      field_started = true;
    }
  }
  if (quoted) throw DataError("unterminated quoted CSV field");
  if (field_started || !field.empty() || !row.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

std::vector<std::string> csv_values(const ReportRow& r) {
  const auto& s = r.summary;
  std::vector<std::string> v = {r.dataset,
                                r.modality,
                                r.model,
                                s.condition,
                                std::to_string(s.n),
                                s.acc_clean().str(),
                                s.acc_attack().str(),
                                s.acc_drop().str(),
                                s.asr_clean().str(),
                                s.asr_attack().str(),
                                s.asr_delta().signed_str(),
                                std::to_string(s.clean_correct),
                                std::to_string(s.attack_correct),
                                std::to_string(s.clean_on_target),
                                std::to_string(s.attack_on_target)};
  if (s.conflict) {
    v.insert(v.end(), {s.asr_audio_target()->str(), s.asr_visual_target()->str(),
                       std::to_string(s.conflict->audio_target), std::to_string(s.conflict->visual_target)});
  } else {
    v.insert(v.end(), 4, std::string{});
  }
  if (s.redistribution) {
    const auto& d = *s.redistribution;
    v.insert(v.end(), {Percent::from_counts(d.ground_truth, s.n).str(), Percent::from_counts(d.injected_target, s.n).str(),
                       Percent::from_counts(d.other, s.n).str(), std::to_string(d.ground_truth),
                       std::to_string(d.injected_target), std::to_string(d.other)});
  } else {
    v.insert(v.end(), 6, std::string{});
  }
  return v;
}

std::uint64_t parse_count(const std::string& s, const std::string& column) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    throw DataError("column " + column + ": '" + s + "' is not a count");
  }
  return std::stoull(s);
}

}  // namespace

std::string emit_summary_csv(const std::vector<ReportRow>& rows) {
  std::ostringstream out;
  const auto& cols = summary_csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";
  for (const auto& r : rows) {
    const auto v = csv_values(r);
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << csv_field(v[i]);
    out << "\n";
  }
  return out.str();
}

std::vector<ReportRow> parse_summary_csv(std::string_view csv) {
  const auto table = parse_csv(csv);
  const auto& cols = summary_csv_columns();
  if (table.empty() || table.front() != cols) throw DataError("summary CSV header does not match");
  std::vector<ReportRow> out;
  for (std::size_t li = 1; li < table.size(); ++li) {
    const auto& f = table[li];
    const std::string where = "summary CSV row " + std::to_string(li) + ": ";
    if (f.size() != cols.size()) throw DataError(where + "wrong number of fields");
    ReportRow r;
    r.dataset = f[0];
    r.modality = f[1];
    r.model = f[2];
    auto& s = r.summary;
    s.condition = f[3];
    s.n = parse_count(f[4], cols[4]);
    s.clean_correct = parse_count(f[11], cols[11]);
    s.attack_correct = parse_count(f[12], cols[12]);
    s.clean_on_target = parse_count(f[13], cols[13]);
    s.attack_on_target = parse_count(f[14], cols[14]);
    if (!f[17].empty() || !f[18].empty()) {
      s.conflict = ConflictCounts{parse_count(f[17], cols[17]), parse_count(f[18], cols[18])};
    }
    if (!f[22].empty() || !f[23].empty() || !f[24].empty()) {
      s.redistribution =
          RedistributionCounts{parse_count(f[22], cols[22]), parse_count(f[23], cols[23]), parse_count(f[24], cols[24])};
    }
    std::vector<std::string> expect;
    try {
      expect = csv_values(r);
    } catch (const DataError& e) {
      throw DataError(where + e.what());
    }
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (expect[i] != f[i]) {
        throw DataError(where + "column " + cols[i] + " holds '" + f[i] + "' but the counts give '" + expect[i] + "'");
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

ojson emit_summary_json(const std::vector<ReportRow>& rows) {
  ojson out = ojson::array();
  for (const auto& r : rows) {
    ojson j;
    j["dataset"] = r.dataset;
    j["modality"] = r.modality;
    j["model"] = r.model;
    const ojson summary = r.summary.to_json();
    for (const auto& [k, v] : summary.items()) j[k] = v;
    out.push_back(std::move(j));
  }
  return out;
}

std::string emit_summary_text(const std::vector<ReportRow>& input, GroupBy group_by) {
  const auto rows = order_rows(input, group_by);
  const std::vector<std::string> header = {"dataset", "modality",  "model",     "condition",
                                           "n",       "acc_clean", "acc_attack (drop)", "asr_clean",
                                           "asr_attack (delta)"};
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> groups;
  for (const auto& r : rows) {
    const auto& s = r.summary;
    cells.push_back({r.dataset, r.modality, r.model, s.condition, std::to_string(s.n), s.acc_clean().str(),
                     s.acc_attack().str() + " (" + s.acc_drop().str() + ")", s.asr_clean().str(),
                     s.asr_attack().str() + " (" + s.asr_delta().signed_str() + ")"});
    switch (group_by) {
      case GroupBy::dataset: groups.push_back(r.dataset); break;
      case GroupBy::modality: groups.push_back(r.modality); break;
      case GroupBy::condition: groups.push_back(s.condition); break;
    }
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& row : cells) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  auto line = [&](const std::vector<std::string>& v) {
    std::string text;
    for (std::size_t c = 0; c < v.size(); ++c) {
      std::string cell = v[c];
      const bool numeric = c >= 4;
      const std::string pad(width[c] - cell.size(), ' ');
      text += (c ? "  " : "") + (numeric ? pad + cell : cell + pad);
    }
    while (!text.empty() && text.back() == ' ') text.pop_back();
    out << text << "\n";
  };
  line(header);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0 && groups[i] != groups[i - 1]) out << "\n";
    line(cells[i]);
  }
  return out.str();
}

const std::vector<std::string>& tradeoff_csv_columns() {
  static const std::vector<std::string> cols = {"family",        "value",          "avg_task_accuracy",
                                                "rel_rms",       "speech_recognition_rate",
                                                "entropy_shift", "flatness_shift", "embedding_variance_shift"};
  return cols;
}

namespace {

std::string number(std::optional<double> v) {
  if (!v) return {};
  std::ostringstream s;
  s.precision(17);
  s << *v;
  return s.str();
}

}  // namespace

std::string emit_tradeoff_csv(const std::vector<FrontierPoint>& points) {
  std::ostringstream out;
  const auto& cols = tradeoff_csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";
  for (const auto& p : points) {
    out << csv_field(p.family) << "," << csv_field(p.value) << "," << number(p.avg_task_accuracy) << ","
        << number(p.stealth.rel_rms) << "," << number(p.stealth.speech_recognition_rate) << ","
        << number(p.stealth.entropy_shift) << "," << number(p.stealth.flatness_shift) << ","
        << number(p.stealth.embedding_variance_shift) << "\n";
  }
  return out.str();
}

std::string provider_label(const ProviderIdentity& id) {
  if (id.version.empty()) return id.name.starts_with("mock:") ? id.name + ":1" : id.name;
  return id.str();
}

ojson emit_run_manifest(const RunInfo& run) {
  ojson j;
  j["schema"] = "typostrike.run_manifest/1";
  j["tool"] = {{"name", "typostrike"}, {"version", run.tool_version}};
  j["global_seed"] = run.global_seed;
  j["parallelism"] = run.parallelism;
  j["config_digest"] = run.config_digest;
  j["dataset"] = {{"manifest", run.dataset_manifest}, {"digest", run.dataset_digest}, {"items", run.items}};
  j["conditions"] = run.conditions;
  ojson providers = ojson::object();
  for (const auto& [kind, id] : run.providers) providers[kind] = id ? ojson(provider_label(*id)) : ojson(nullptr);
  j["providers"] = std::move(providers);
  j["decode"] = {{"temperature", run.temperature}};
  if (run.stealth) {
    const auto& s = *run.stealth;
    j["stealth"] = {{"epsilon", s.epsilon},
                    {"frame_length", s.frame_length},
                    {"hop_length", s.hop_length},
                    {"window", std::string(to_string(s.window))},
                    {"embedding_window_seconds", s.embedding_window_seconds},
                    {"embedding_hop_seconds", s.embedding_hop_seconds}};
  } else {
    j["stealth"] = nullptr;
  }
  j["counts"] = {{"rows", run.rows},         {"ok", run.ok_rows},
                 {"errors", run.error_rows}, {"reused", run.reused},
                 {"computed", run.computed}, {"clean_calls", run.clean_calls},
                 {"attacked_calls", run.attacked_calls}};
  j["results"] = {{"path", run.results_path}, {"digest", run.results_digest}};
  j["wall_clock"] = {{"started_at", run.started_at}, {"finished_at", run.finished_at}};
  return j;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ojson stealth_means_json(const StealthMeans& m) {
  ojson j = ojson::object();
  auto put = [&](const char* k, const std::optional<double>& v) { j[k] = v ? ojson(*v) : ojson(nullptr); };
  put("rel_rms", m.rel_rms);
  put("speech_recognition_rate", m.speech_recognition_rate);
  put("entropy_shift", m.entropy_shift);
  put("flatness_shift", m.flatness_shift);
  put("embedding_variance_shift", m.embedding_variance_shift);
  return j;
}

StealthMeans stealth_means_from_json(const nlohmann::json& j) {
  auto get = [&](const char* k) -> std::optional<double> {
    if (!j.contains(k) || j[k].is_null()) return std::nullopt;
    return j[k].get<double>();
  };
  return {get("rel_rms"), get("speech_recognition_rate"), get("entropy_shift"), get("flatness_shift"),
          get("embedding_variance_shift")};
}

ojson sweep_to_json(const SweepResult& sweep) {
  ojson j;
  j["axis"] = std::string(to_string(sweep.grid.axis));
  j["values"] = sweep.grid.values;
  j["points"] = ojson::array();
  for (const auto& p : sweep.points) {
    ojson pj;
    pj["value"] = p.value;
    pj["condition"] = p.condition.to_json();
    pj["overall"] = p.overall.to_json();
    pj["by_modality"] = ojson::object();
    for (const auto& [m, s] : p.by_modality) pj["by_modality"][std::string(to_string(m))] = s.to_json();
    pj["stealth"] = stealth_means_json(p.stealth);
    j["points"].push_back(std::move(pj));
  }
  return j;
}

SweepResult sweep_from_json(const nlohmann::json& j) {
  SweepResult out;
  try {
    out.grid.axis = parse_sweep_axis(j.at("axis").get<std::string>());
    out.grid.values = j.at("values").get<std::vector<std::string>>();
    for (const auto& pj : j.at("points")) {
      SweepPoint p;
      p.value = pj.at("value").get<std::string>();
      p.condition = Condition::from_json(ojson(pj.at("condition")));
      p.overall = MetricsSummary::from_json(pj.at("overall"));
      for (const auto& [m, s] : pj.at("by_modality").items()) {
        p.by_modality.emplace(parse_question_modality(m), MetricsSummary::from_json(s));
      }
      p.stealth = stealth_means_from_json(pj.at("stealth"));
      out.points.push_back(std::move(p));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("sweep summary: ") + e.what());
  }
  return out;
}

}  // namespace typostrike
