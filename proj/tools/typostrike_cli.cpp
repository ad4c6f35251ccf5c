#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "typostrike/config.hpp"
#include "typostrike/digest.hpp"
#include "typostrike/error.hpp"
#include "typostrike/experiment.hpp"
#include "typostrike/injection.hpp"
#include "typostrike/mock_providers.hpp"
#include "typostrike/report.hpp"
#include "typostrike/stealth.hpp"
#include "typostrike/visual.hpp"
#include "typostrike/wav_io.hpp"

namespace fs = std::filesystem;
using namespace typostrike;
using ojson = nlohmann::ordered_json;

namespace {

struct Common {
  std::string config_path;
  bool mock = false;
  std::optional<std::uint64_t> seed;
  std::optional<int> parallelism;
  std::vector<std::string> endpoints;  // kind=url
  double asr_threshold = 0.5;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "Run configuration file (JSON)");
  cmd->add_flag("--mock", c.mock, "Use the deterministic in-process providers");
  cmd->add_option("--seed", c.seed, "Global seed (overrides the config)");
  cmd->add_option("--parallelism", c.parallelism, "Worker threads (overrides the config)");
  cmd->add_option("--endpoint", c.endpoints, "KIND=URL endpoint override, e.g. mllm=http://host:8000");
  cmd->add_option("--asr-threshold", c.asr_threshold, "Mock speech recogniser threshold");
}

RunConfig resolve_config(const Common& c) {
  RunConfig cfg = c.config_path.empty() ? RunConfig{} : RunConfig::load(c.config_path);
  for (const auto& e : c.endpoints) {
    const auto eq = e.find('=');
    if (eq == std::string::npos) throw UsageError("--endpoint expects KIND=URL, got '" + e + "'");
    const ProviderKind kind = parse_provider_kind(e.substr(0, eq));
    ProviderEndpoint ep = cfg.endpoints.contains(kind) ? cfg.endpoints[kind] : ProviderEndpoint{};
    ep.kind = kind;
    ep.base_url = e.substr(eq + 1);
    ep.validate();
    cfg.endpoints[kind] = ep;
  }
  cfg.fill_endpoints_from_env();
  if (c.seed) cfg.seed = *c.seed;
  if (c.parallelism) {
    if (*c.parallelism < 1) throw UsageError("--parallelism must be >= 1");
    cfg.parallelism = *c.parallelism;
  }
  return cfg;
}

ExperimentProviders providers_for(const Common& c, const RunConfig& cfg, const std::vector<DatasetItem>& items) {
  if (c.mock) return mock_providers(items, c.asr_threshold);
  return http_providers(cfg);
}

RunOptions options_for(const RunConfig& cfg) {
  RunOptions o;
  o.global_seed = cfg.seed;
  o.parallelism = cfg.parallelism;
  o.stealth_config = cfg.stealth;
  o.registry = cfg.templates;
  return o;
}

std::string file_digest(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot open " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return sha256_hex(s.str());
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << text;
}

RunInfo run_info(const RunConfig& cfg, const ExperimentProviders& p, const std::string& dataset,
                 std::size_t items, const std::vector<Condition>& conditions, const RunOutcome& run,
                 const RunOptions& opts, const std::string& results, const std::string& started) {
  RunInfo info;
  info.tool_version = std::string(kToolVersion);
  info.global_seed = cfg.seed;
  info.parallelism = cfg.parallelism;
  info.config_digest = cfg.digest();
  info.dataset_manifest = dataset;
  info.dataset_digest = file_digest(dataset);
  info.items = items;
  for (const auto& c : conditions) info.conditions.push_back(c.id);
  auto ident = [](const auto& ptr) -> std::optional<ProviderIdentity> {
    if (!ptr) return std::nullopt;
    return ptr->identity();
  };
  info.providers = {{"tts", ident(p.tts)},
                    {"asr", ident(p.asr)},
                    {"embedding", ident(p.embedder)},
                    {"mllm", ident(p.mllm)},
                    {"textgen", ident(p.textgen)}};
  if (opts.stealth) info.stealth = opts.stealth_config;
  info.rows = run.rows.size();
  for (const auto& r : run.rows) (r.ok ? info.ok_rows : info.error_rows)++;
  info.reused = run.reused;
  info.computed = run.computed;
  info.clean_calls = run.clean_calls;
  info.attacked_calls = run.attacked_calls;
  info.results_path = results;
  info.results_digest = file_digest(results);
  info.started_at = started;
  info.finished_at = utc_timestamp();
  return info;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Audio and visual typography attacks on multi-modal models: construction, stealth and evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  // ingest
  std::string ingest_dataset_path;
  bool ingest_load = false;
  auto* ingest = app.add_subcommand("ingest", "Validate a dataset manifest");
  ingest->add_option("--dataset", ingest_dataset_path, "JSONL dataset manifest")->required();
  ingest->add_flag("--load-media", ingest_load, "Also decode every audio file and frame");

  // attack
  Common attack_c;
  std::string attack_in, attack_out, attack_phrase, attack_target, attack_template = "mma_bench",
                                                                     attack_manifest, attack_replay;
  std::string attack_voice(kDefaultVoice), attack_repetition = "fill";
  std::string attack_frame_in, attack_frame_out;
  double attack_volume = kDefaultVolumeMultiplier, attack_position = 0.0;
  auto* attack = app.add_subcommand("attack", "Inject spoken (and optionally overlaid) text into one clip");
  add_common(attack, attack_c);
  attack->add_option("--audio", attack_in, "Original WAV")->required();
  attack->add_option("--out", attack_out, "Attacked WAV to write")->required();
  attack->add_option("--phrase", attack_phrase, "Exact phrase to speak");
  attack->add_option("--target", attack_target, "Target label expanded through --template");
  attack->add_option("--template", attack_template, "Template id");
  attack->add_option("--voice", attack_voice, "Voice identifier");
  attack->add_option("--volume", attack_volume, "Volume multiplier g");
  attack->add_option("--position", attack_position, "Placement fraction in [0, 1]");
  attack->add_option("--repetition", attack_repetition, "'fill' or a copy count");
  attack->add_option("--manifest", attack_manifest, "Write the attack manifest here");
  attack->add_option("--replay", attack_replay, "Rebuild the attack from a manifest instead");
  attack->add_option("--frame", attack_frame_in, "PNG frame to overlay the phrase on");
  attack->add_option("--frame-out", attack_frame_out, "Where to write the overlaid frame");

  // stealth
  Common stealth_c;
  std::string stealth_orig, stealth_attacked, stealth_out;
  auto* stealth = app.add_subcommand("stealth", "Stealth metrics of an attacked clip against its original");
  add_common(stealth, stealth_c);
  stealth->add_option("--orig", stealth_orig, "Original WAV")->required();
  stealth->add_option("--attacked", stealth_attacked, "Attacked WAV")->required();
  stealth->add_option("--out", stealth_out, "Report path (default stdout)");

  // evaluate
  Common eval_c;
  std::string eval_dataset, eval_conditions, eval_results, eval_summary, eval_manifest, eval_records;
  bool eval_no_stealth = false;
  std::optional<std::size_t> eval_max_new;
  auto* evaluate = app.add_subcommand("evaluate", "Run conditions over a dataset, or score an EvalRecord file");
  add_common(evaluate, eval_c);
  evaluate->add_option("--dataset", eval_dataset, "JSONL dataset manifest");
  evaluate->add_option("--conditions", eval_conditions, "Conditions JSON file");
  evaluate->add_option("--results", eval_results, "Results JSONL (resumed when present)");
  evaluate->add_option("--summary", eval_summary, "Metrics summary JSON to write");
  evaluate->add_option("--run-manifest", eval_manifest, "Run manifest JSON to write");
  evaluate->add_option("--records", eval_records, "Score an EvalRecord JSONL file instead of running");
  evaluate->add_flag("--no-stealth", eval_no_stealth, "Skip stealth measurement");
  evaluate->add_option("--max-new", eval_max_new, "Stop after this many new rows");

  // sweep
  Common sweep_c;
  std::string sweep_dataset, sweep_conditions, sweep_base, sweep_axis, sweep_values, sweep_out;
  auto* sweep = app.add_subcommand("sweep", "Sweep one injection parameter");
  add_common(sweep, sweep_c);
  sweep->add_option("--dataset", sweep_dataset, "JSONL dataset manifest")->required();
  sweep->add_option("--conditions", sweep_conditions, "Conditions JSON holding the base condition")->required();
  sweep->add_option("--base", sweep_base, "Base condition id (default: the first)");
  sweep->add_option("--axis", sweep_axis, "volume, position, repetition or voice")->required();
  sweep->add_option("--values", sweep_values, "Comma-separated grid (default: configured grid)");
  sweep->add_option("--out", sweep_out, "Output directory")->required();

  // tradeoff
  std::vector<std::string> tradeoff_sweeps;
  std::string tradeoff_out;
  auto* tradeoff = app.add_subcommand("tradeoff", "Join sweeps into the effectiveness-stealth frontier");
  tradeoff->add_option("--sweep", tradeoff_sweeps, "Sweep summary JSON files")->required();
  tradeoff->add_option("--out", tradeoff_out, "Frontier CSV path (default stdout)");

  // safety
  Common safety_c;
  std::string safety_dataset, safety_cue = "keyword", safety_results, safety_template;
  auto* safety = app.add_subcommand("safety", "Safety-cue attack against harmful-content detection");
  add_common(safety, safety_c);
  safety->add_option("--dataset", safety_dataset, "JSONL manifest of harmful items")->required();
  safety->add_option("--cue", safety_cue, "keyword or prompt");
  safety->add_option("--results", safety_results, "Results JSONL")->required();

  // report
  std::vector<std::string> report_results;
  std::string report_format = "text", report_group = "dataset", report_out;
  auto* report = app.add_subcommand("report", "Summary tables from results JSONL");
  report->add_option("--results", report_results, "Results JSONL files")->required();
  report->add_option("--format", report_format, "text, csv or json");
  report->add_option("--group-by", report_group, "dataset, modality or condition");
  report->add_option("--out", report_out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (ingest->parsed()) {
      const auto items = ingest_dataset(ingest_dataset_path);
      std::map<std::string, std::size_t> per_dataset;
      for (const auto& item : items) {
        ++per_dataset[item.dataset_id];
        if (ingest_load) load_item_media(item, true);
      }
      ojson j;
      j["items"] = items.size();
      j["datasets"] = per_dataset;
      std::cout << j.dump(2) << "\n";
      return 0;
    }

    if (attack->parsed()) {
      const RunConfig cfg = resolve_config(attack_c);
      const Waveform orig = load_canonical_audio(attack_in);
      std::shared_ptr<TtsProvider> tts;
      if (attack_c.mock) {
        tts = std::make_shared<DeterministicTts>();
      } else {
        tts = http_providers(cfg).tts;
        if (!tts) throw UsageError("no TTS endpoint configured (use --mock, --endpoint tts=URL or a config file)");
      }
      AudioAttack result;
      std::string phrase;
      if (!attack_replay.empty()) {
        std::ifstream in(attack_replay);
        if (!in) throw DataError("cannot open " + attack_replay);
        ojson m;
        try {
          m = ojson::parse(in);
        } catch (const nlohmann::json::exception& e) {
          throw DataError(attack_replay + ": " + e.what());
        }
        result = replay_audio_attack(orig, m, *tts);
      } else {
        if (attack_phrase.empty() == attack_target.empty()) throw UsageError("give exactly one of --phrase and --target");
        phrase = attack_phrase.empty() ? build_phrase(attack_template, attack_target, cfg.templates) : attack_phrase;
        InjectionSpec spec;
        spec.phrase = phrase;
        spec.voice = attack_voice;
        spec.volume_multiplier = attack_volume;
        spec.placement_fraction = attack_position;
        spec.repetition = parse_repetition(attack_repetition);
        spec.target_label = attack_target;
        result = construct_audio_attack(orig, spec, *tts);
      }
      write_wav(attack_out, result.attacked);
      ojson manifest = result.manifest;
      if (!attack_frame_in.empty()) {
        if (attack_frame_out.empty()) throw UsageError("--frame needs --frame-out");
        if (phrase.empty()) phrase = manifest.at("spec").at("phrase").get<std::string>();
        OverlaySpec style;
        style.text = phrase;
        FrameSet frames{{read_png(attack_frame_in)}, {0.0}};
        const FrameSet drawn = overlay_text(frames, style);
        write_png(attack_frame_out, drawn.frames.front());
        manifest["visual"] = {{"overlay", style.to_json()}, {"frames_digest", frames_digest(drawn)}};
      }
      if (!attack_manifest.empty()) write_text(attack_manifest, manifest.dump(2) + "\n");
      return 0;
    }

    if (stealth->parsed()) {
      const RunConfig cfg = resolve_config(stealth_c);
      const Waveform orig = load_canonical_audio(stealth_orig);
      const Waveform mix = load_canonical_audio(stealth_attacked);
      if (orig.size() != mix.size()) throw DataError("original and attacked clips differ in length");
      std::vector<double> inj(orig.size());
      for (std::size_t i = 0; i < inj.size(); ++i) inj[i] = mix.samples()[i] - orig.samples()[i];
      std::shared_ptr<EmbeddingProvider> embedder;
      std::shared_ptr<AsrProvider> asr;
      if (stealth_c.mock) {
        embedder = std::make_shared<DeterministicEmbedder>();
        asr = std::make_shared<DeterministicAsr>(random_speech_nouns(), stealth_c.asr_threshold);
      } else {
        const auto p = http_providers(cfg);
        embedder = p.embedder;
        asr = p.asr;
      }
      const StealthReport r = stealth_report(orig, Waveform(std::move(inj), orig.sample_rate()), mix,
                                             {embedder.get(), asr.get()}, cfg.stealth);
      write_text(stealth_out, r.to_json().dump(2) + "\n");
      return 0;
    }

    if (evaluate->parsed()) {
      if (!eval_records.empty()) {
        std::ifstream in(eval_records);
        if (!in) throw DataError("cannot open " + eval_records);
        const auto records = read_eval_records(in);
        std::map<std::string, std::vector<EvalRecord>> by_condition;
        for (const auto& r : records) by_condition[r.condition].push_back(r);
        ojson out = ojson::array();
        for (const auto& [cond, recs] : by_condition) out.push_back(compute_metrics(recs).to_json());
        write_text(eval_summary, out.dump(2) + "\n");
        return 0;
      }
      if (eval_dataset.empty() || eval_conditions.empty() || eval_results.empty()) {
        throw UsageError("evaluate needs --dataset, --conditions and --results (or --records)");
      }
      const std::string started = utc_timestamp();
      const RunConfig cfg = resolve_config(eval_c);
      const auto items = ingest_dataset(eval_dataset);
      const auto conditions = load_conditions(eval_conditions);
      const auto providers = providers_for(eval_c, cfg, items);
      RunOptions opts = options_for(cfg);
      opts.stealth = !eval_no_stealth;
      opts.max_new_records = eval_max_new;
      const RunOutcome run = run_experiment(items, conditions, providers, opts, fs::path(eval_results));
      ojson summary = ojson::array();
      for (const auto& c : conditions) {
        try {
          summary.push_back(summarize(run.rows, c.id).to_json());
        } catch (const DataError&) {
          // condition without successful rows yet
        }
      }
      if (!eval_summary.empty()) write_text(eval_summary, summary.dump(2) + "\n");
      if (!eval_manifest.empty()) {
        const auto info = run_info(cfg, providers, eval_dataset, items.size(), conditions, run, opts, eval_results,
                                   started);
        write_text(eval_manifest, emit_run_manifest(info).dump(2) + "\n");
      }
      std::cerr << run.rows.size() << " rows (" << run.reused << " reused, " << run.computed << " computed)"
                << (run.complete ? "" : ", incomplete") << "\n";
      return 0;
    }

    if (sweep->parsed()) {
      const RunConfig cfg = resolve_config(sweep_c);
      const auto items = ingest_dataset(sweep_dataset);
      const auto conditions = load_conditions(sweep_conditions);
      const Condition* base = &conditions.front();
      if (!sweep_base.empty()) {
        base = nullptr;
        for (const auto& c : conditions) {
          if (c.id == sweep_base) base = &c;
        }
        if (!base) throw UsageError("no condition '" + sweep_base + "' in " + sweep_conditions);
      }
      const SweepAxis axis = parse_sweep_axis(sweep_axis);
      SweepGrid grid = sweep_values.empty() ? cfg.grid(axis) : SweepGrid{axis, split_list(sweep_values)};
      const auto providers = providers_for(sweep_c, cfg, items);
      const SweepResult result = run_sweep(items, grid, *base, providers, options_for(cfg), fs::path(sweep_out));
      const fs::path summary = fs::path(sweep_out) / ("sweep_" + std::string(to_string(axis)) + ".json");
      write_text(summary.string(), sweep_to_json(result).dump(2) + "\n");
      for (const auto& p : result.points) {
        std::cout << to_string(axis) << "=" << p.value << "  acc_attack " << p.overall.acc_attack().str()
                  << "  asr_attack " << p.overall.asr_attack().str() << "\n";
      }
      return 0;
    }

    if (tradeoff->parsed()) {
      std::vector<SweepResult> sweeps;
      for (const auto& path : tradeoff_sweeps) {
        std::ifstream in(path);
        if (!in) throw DataError("cannot open " + path);
        try {
          sweeps.push_back(sweep_from_json(nlohmann::json::parse(in)));
        } catch (const nlohmann::json::exception& e) {
          throw DataError(path + ": " + e.what());
        }
      }
      const auto points = tradeoff_frontier(sweeps);
      write_text(tradeoff_out, emit_tradeoff_csv(points));
      for (auto axis : {StealthAxis::rel_rms, StealthAxis::speech_recognition_rate, StealthAxis::entropy_shift,
                        StealthAxis::flatness_shift, StealthAxis::embedding_variance_shift}) {
        try {
          std::cerr << "spearman(" << to_string(axis) << ", avg_task_accuracy) = " << rank_correlation(points, axis)
                    << "\n";
        } catch (const DataError& e) {
          std::cerr << "spearman(" << to_string(axis) << "): " << e.what() << "\n";
        }
      }
      return 0;
    }

    if (safety->parsed()) {
      const RunConfig cfg = resolve_config(safety_c);
      const auto items = ingest_dataset(safety_dataset);
      Condition c;
      c.id = "safety_" + safety_cue;
      c.safety_cue = parse_safety_cue(safety_cue);
      if (c.safety_cue == SafetyCue::none) throw UsageError("--cue must be keyword or prompt");
      const auto providers = providers_for(safety_c, cfg, items);
      const auto run = run_experiment(items, {c}, providers, options_for(cfg), fs::path(safety_results));
      std::vector<EvalRecord> attacked, clean;
      for (const auto& r : run.rows) {
        if (!r.ok) continue;
        attacked.push_back(r.record);
        EvalRecord k = r.record;
        k.attacked_prediction = k.clean_prediction;
        clean.push_back(k);
      }
      if (attacked.empty()) throw DataError("no successful rows");
      const auto before = harmful_rate(clean);
      const auto after = harmful_rate(attacked);
      ojson j;
      j["n"] = after.n;
      j["clean"] = {{"detection", before.detection.str()}, {"unsafe_to_safe", before.unsafe_to_safe.str()}};
      j[c.id] = {{"detection", after.detection.str()}, {"unsafe_to_safe", after.unsafe_to_safe.str()}};
      std::cout << j.dump(2) << "\n";
      return 0;
    }

    if (report->parsed()) {
      std::vector<ResultRow> rows;
      for (const auto& path : report_results) {
        auto part = read_results(fs::path(path));
        rows.insert(rows.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
      }
      const GroupBy group = parse_group_by(report_group);
      const auto table = order_rows(report_rows(rows), group);
      if (table.empty()) throw DataError("no successful rows to report");
      std::string text;
      if (report_format == "text") {
        text = emit_summary_text(table, group);
      } else if (report_format == "csv") {
        text = emit_summary_csv(table);
      } else if (report_format == "json") {
        text = emit_summary_json(table).dump(2) + "\n";
      } else {
        throw UsageError("--format must be text, csv or json");
      }
      write_text(report_out, text);
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const ProviderError& e) {
    std::cerr << "provider error: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
