#include "typostrike/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <future>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "typostrike/digest.hpp"
#include "typostrike/mock_providers.hpp"
#include "typostrike/rng.hpp"
#include "typostrike/text.hpp"
#include "typostrike/wav_io.hpp"

namespace typostrike {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

// ---- dataset items

std::optional<std::string> DatasetItem::correct_letter() const { return letter_of(ground_truth); }

std::optional<std::string> DatasetItem::letter_of(std::string_view content) const {
  if (!options) return std::nullopt;
  for (const auto& o : *options) {
    if (same_label(o.content, content)) return o.letter;
  }
  return std::nullopt;
}

std::string DatasetItem::prompt() const {
  std::string p = question;
  if (options) {
    for (const auto& o : *options) p += "\n" + o.letter + ". " + o.content;
  }
  return p;
}

ojson DatasetItem::to_json() const {
  ojson j;
  j["item_id"] = item_id;
  j["dataset_id"] = dataset_id;
  j["frames"] = ojson::array();
  for (const auto& f : frames) j["frames"].push_back(f.generic_string());
  j["audio"] = audio.generic_string();
  j["question"] = question;
  j["question_modality"] = std::string(to_string(question_modality));
  j["ground_truth"] = ground_truth;
  if (options) {
    j["options"] = ojson::array();
    for (const auto& o : *options) j["options"].push_back({{"letter", o.letter}, {"content", o.content}});
  }
  return j;
}

namespace {

DatasetItem parse_item(const nlohmann::json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw DataError("item must be a JSON object");
  auto field = [&](const char* name) -> const nlohmann::json& {
    if (!j.contains(name) || j[name].is_null()) throw DataError(std::string("missing field '") + name + "'");
    return j[name];
  };
  auto text = [&](const char* name) {
    const auto& v = field(name);
    if (!v.is_string() || v.get<std::string>().empty()) {
      throw DataError(std::string("field '") + name + "' must be a non-empty string");
    }
    return v.get<std::string>();
  };
  auto resolve = [&](const std::string& p) {
    fs::path path(p);
    if (path.is_relative()) path = base_dir / path;
    if (!fs::exists(path)) throw DataError("missing file " + path.string());
    return path;
  };

  DatasetItem item;
  item.item_id = text("item_id");
  item.dataset_id = text("dataset_id");
  item.question = text("question");
  item.question_modality = parse_question_modality(text("question_modality"));
  item.ground_truth = text("ground_truth");
  item.audio = resolve(text("audio"));
  if (j.contains("frames")) {
    if (!j["frames"].is_array()) throw DataError("field 'frames' must be an array");
    for (const auto& f : j["frames"]) {
      if (!f.is_string()) throw DataError("field 'frames' must hold paths");
      item.frames.push_back(resolve(f.get<std::string>()));
    }
  }
  if (j.contains("options") && !j["options"].is_null()) {
    const auto& opts = j["options"];
    if (!opts.is_array() || opts.size() < 2) throw DataError("field 'options' must list at least two options");
    std::vector<AnswerOption> parsed;
    std::set<std::string> letters, contents;
    for (const auto& o : opts) {
      if (!o.is_object() || !o.contains("letter") || !o.contains("content") || !o["letter"].is_string() ||
          !o["content"].is_string()) {
        throw DataError("each option needs string 'letter' and 'content'");
      }
      AnswerOption opt{o["letter"].get<std::string>(), o["content"].get<std::string>()};
      if (normalize_label(opt.letter).empty() || normalize_label(opt.content).empty()) {
        throw DataError("option letter and content must be non-empty");
      }
      if (!letters.insert(normalize_label(opt.letter)).second || !contents.insert(normalize_label(opt.content)).second) {
        throw DataError("options repeat a letter or content");
      }
      parsed.push_back(std::move(opt));
    }
    item.options = std::move(parsed);
    // Ground truth may be given as the letter or the content.
    std::optional<std::string> content;
    for (const auto& o : *item.options) {
      if (same_label(o.content, item.ground_truth) || same_label(o.letter, item.ground_truth)) content = o.content;
    }
    if (!content) throw DataError("ground_truth '" + item.ground_truth + "' names no option");
    item.ground_truth = *content;
  }
  return item;
}

}  // namespace

std::vector<DatasetItem> parse_dataset(std::istream& in, const fs::path& base_dir) {
  std::vector<DatasetItem> items;
  std::set<std::string> ids;
  std::map<std::string, bool> mc_by_dataset;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    try {
      auto item = parse_item(nlohmann::json::parse(line), base_dir);
      if (!ids.insert(item.item_id).second) throw DataError("duplicate id '" + item.item_id + "'");
      const auto [it, fresh] = mc_by_dataset.emplace(item.dataset_id, item.multiple_choice());
      if (!fresh && it->second != item.multiple_choice()) {
        throw DataError("dataset " + item.dataset_id + " mixes items with and without options");
      }
      items.push_back(std::move(item));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(where + e.what());
    } catch (const DataError& e) {
      throw DataError(where + e.what());
    }
  }
  if (items.empty()) throw DataError("dataset manifest has no items");
  return items;
}

std::vector<DatasetItem> ingest_dataset(const fs::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw DataError("cannot open " + manifest.string());
  return parse_dataset(in, manifest.parent_path());
}

std::vector<std::string> dataset_vocabulary(const std::vector<DatasetItem>& items, std::string_view dataset_id) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  auto add = [&](const std::string& label) {
    if (seen.insert(normalize_label(label)).second) out.push_back(label);
  };
  for (const auto& item : items) {
    if (item.dataset_id != dataset_id) continue;
    if (item.options) {
      for (const auto& o : *item.options) add(o.content);
    } else {
      add(item.ground_truth);
    }
  }
  return out;
}

ItemMedia load_item_media(const DatasetItem& item, bool with_frames) {
  ItemMedia media;
  media.audio = std::make_shared<const Waveform>(load_canonical_audio(item.audio));
  if (with_frames && !item.frames.empty()) {
    FrameSet fs;
    const double step = media.audio->duration_seconds() / static_cast<double>(item.frames.size());
    for (std::size_t i = 0; i < item.frames.size(); ++i) {
      fs.frames.push_back(read_png(item.frames[i]));
      fs.timestamps.push_back(step * static_cast<double>(i));
    }
    if (step <= 0.0) {
      for (std::size_t i = 0; i < fs.timestamps.size(); ++i) fs.timestamps[i] = static_cast<double>(i);
    }
    fs.validate();
    media.frames = std::make_shared<const FrameSet>(std::move(fs));
  }
  return media;
}

// ---- conditions

std::string_view to_string(Richness r) {
  switch (r) {
    case Richness::none: return "none";
    case Richness::random_noise: return "random_noise";
    case Richness::random_speech: return "random_speech";
    case Richness::weak: return "weak";
    case Richness::strong: return "strong";
    case Richness::llm_designed: return "llm_designed";
  }
  return "none";
}

Richness parse_richness(std::string_view name) {
  for (auto r : {Richness::none, Richness::random_noise, Richness::random_speech, Richness::weak, Richness::strong,
                 Richness::llm_designed}) {
    if (to_string(r) == name) return r;
  }
  throw DataError("unknown richness '" + std::string(name) + "'");
}

std::string_view to_string(SafetyCue c) {
  switch (c) {
    case SafetyCue::none: return "none";
    case SafetyCue::keyword: return "keyword";
    case SafetyCue::prompt: return "prompt";
  }
  return "none";
}

SafetyCue parse_safety_cue(std::string_view name) {
  for (auto c : {SafetyCue::none, SafetyCue::keyword, SafetyCue::prompt}) {
    if (to_string(c) == name) return c;
  }
  throw DataError("unknown safety cue '" + std::string(name) + "'");
}

const std::vector<std::string>& random_speech_nouns() {
  static const std::vector<std::string> nouns = {
      "table", "chair", "window", "door", "pencil", "bottle", "candle", "blanket", "pillow", "mirror",
      "ladder", "bucket", "basket", "hammer", "wallet", "ticket", "carpet", "kettle", "jacket", "helmet",
      "anchor", "bridge", "castle", "tunnel", "garden", "forest", "desert", "island", "valley", "river",
      "ocean", "meadow", "harbor", "village", "market", "museum", "library", "station", "airport", "engine",
      "rocket", "planet", "comet", "cloud", "thunder", "rainbow", "shadow", "crystal", "marble", "copper",
      "silver", "velvet", "cotton", "paper", "letter", "parcel", "envelope", "stamp", "puzzle", "riddle",
      "lantern", "compass", "needle", "thread", "ribbon", "spoon", "plate", "bowl", "kitchen", "closet",
      "ceiling", "staircase", "chimney", "fence", "gate", "shovel", "rope", "tent", "wagon", "bicycle",
      "tractor", "sailboat", "canoe", "pebble", "boulder", "mountain", "volcano", "glacier", "canyon", "cliff",
      "newspaper", "magazine", "notebook", "calendar", "clock", "battery", "cable", "socket", "ruler", "umbrella"};
  return nouns;
}

Carriers carriers_of(AttackMode mode) {
  switch (mode) {
    case AttackMode::audio_only: return {true, false, false};
    case AttackMode::visual_only: return {false, true, false};
    case AttackMode::text_only: return {false, false, true};
    case AttackMode::aligned:
    case AttackMode::conflicting: return {true, true, false};
  }
  return {};
}

void Condition::validate() const {
  if (id.empty()) throw DataError("condition id must be non-empty");
  const std::string where = "condition " + id + ": ";
  if (safety_cue != SafetyCue::none) {
    if (mode != AttackMode::audio_only) throw DataError(where + "safety cues travel on the audio carrier only");
    if (richness != Richness::none) throw DataError(where + "safety cues cannot be combined with a richness level");
  }
  if (richness != Richness::none && !carriers_of(mode).audio) {
    throw DataError(where + "richness levels apply to the audio carrier");
  }
  InjectionSpec probe = injection;
  if (probe.phrase.empty()) probe.phrase = "probe";
  try {
    probe.validate();
  } catch (const DataError& e) {
    throw DataError(where + e.what());
  }
}

ojson Condition::to_json() const {
  ojson j;
  j["id"] = id;
  j["mode"] = std::string(to_string(mode));
  j["richness"] = std::string(to_string(richness));
  j["safety_cue"] = std::string(to_string(safety_cue));
  ojson inj = injection.to_json();
  inj.erase("phrase");
  inj.erase("target_label");
  j["injection"] = std::move(inj);
  j["template_id"] = template_id;
  j["prompt_position"] = std::string(to_string(prompt_position));
  ojson overlay = this->overlay.to_json();
  overlay.erase("text");
  j["overlay"] = std::move(overlay);
  return j;
}

Condition Condition::from_json(const ojson& j) {
  if (!j.is_object()) throw DataError("condition must be a JSON object");
  Condition c;
  try {
    c.id = j.at("id").get<std::string>();
    c.mode = parse_attack_mode(j.value("mode", std::string("audio_only")));
    c.richness = parse_richness(j.value("richness", std::string("none")));
    c.safety_cue = parse_safety_cue(j.value("safety_cue", std::string("none")));
    if (j.contains("injection")) {
      ojson inj = j.at("injection");
      inj["phrase"] = "placeholder";
      c.injection = InjectionSpec::from_json(inj);
      c.injection.phrase.clear();
    }
    c.template_id = j.value("template_id", std::string{});
    c.prompt_position = parse_prompt_position(j.value("prompt_position", std::string("suffix")));
    if (j.contains("overlay")) c.overlay = OverlaySpec::from_json(j.at("overlay"));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("condition: ") + e.what());
  }
  c.validate();
  return c;
}

std::vector<Condition> load_conditions(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  ojson j;
  try {
    j = ojson::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  const ojson& list = j.is_object() && j.contains("conditions") ? j["conditions"] : j;
  if (!list.is_array() || list.empty()) throw DataError(path.string() + ": expected a non-empty list of conditions");
  std::vector<Condition> out;
  std::set<std::string> ids;
  for (const auto& c : list) {
    out.push_back(Condition::from_json(c));
    if (!ids.insert(out.back().id).second) throw DataError("duplicate condition id '" + out.back().id + "'");
  }
  return out;
}

// ---- attack construction

namespace {

std::vector<std::string> option_contents(const DatasetItem& item) {
  std::vector<std::string> out;
  for (const auto& o : *item.options) out.push_back(o.content);
  return out;
}

}  // namespace

ConditionAttack build_condition_attacks(const DatasetItem& item, const ItemMedia& media,
                                        const std::vector<std::string>& vocabulary, const Condition& condition,
                                        const ExperimentProviders& providers, std::uint64_t seed,
                                        const TemplateRegistry& registry) {
  condition.validate();
  if (!media.audio) throw DataError("item " + item.item_id + ": audio not loaded");
  const std::string template_id = condition.template_id.empty() ? item.dataset_id : condition.template_id;

  ConditionAttack out;
  if (condition.safety_cue != SafetyCue::none) {
    out.plan.mode = AttackMode::audio_only;
    out.plan.audio_target = "harmless";
    out.plan.rng_seed = seed;
    out.plan.validate(item.ground_truth);
  } else {
    // Option items draw targets from their own options so every target has a letter.
    out.plan = assign_targets(item.ground_truth, item.multiple_choice() ? option_contents(item) : vocabulary,
                              condition.mode, seed);
  }
  const Carriers carriers = carriers_of(out.plan.mode);

  out.audio = media.audio;
  ojson audio_manifest = nullptr;
  if (carriers.audio) {
    const std::string& target = *out.plan.audio_target;
    InjectionSpec spec = condition.injection;
    spec.target_label = target;
    auto require_options = [&] {
      if (!item.multiple_choice()) {
        throw DataError("condition " + condition.id + ": richness '" + std::string(to_string(condition.richness)) +
                        "' needs an option dataset");
      }
    };
    AudioAttack attack;
    if (condition.richness == Richness::random_noise) {
      const std::uint64_t noise_seed = derive_seed(seed, "random_noise");
      const std::size_t n = media.audio->size();
      spec.phrase = "[white noise]";
      attack = inject_waveform(*media.audio, white_noise(n, noise_seed, media.audio->sample_rate()), spec,
                               noise_source(noise_seed, n));
    } else {
      switch (condition.safety_cue) {
        case SafetyCue::keyword: spec.phrase = std::string(kSafetyKeywordCue); break;
        case SafetyCue::prompt: spec.phrase = std::string(kSafetyPromptCue); break;
        case SafetyCue::none: break;
      }
      if (condition.safety_cue == SafetyCue::none) {
        switch (condition.richness) {
          case Richness::none: spec.phrase = build_phrase(template_id, target, registry); break;
          case Richness::random_speech: {
            std::set<std::string> taken;
            for (const auto& v : vocabulary) {
              for (const auto& w : split_words(v)) taken.insert(w);
            }
            for (const auto& w : split_words(item.ground_truth)) taken.insert(w);
            std::vector<std::string> pool;
            for (const auto& n : random_speech_nouns()) {
              if (!taken.contains(n)) pool.push_back(n);
            }
            Rng rng(derive_seed(seed, "random_speech"));
            std::vector<std::string> words;
            for (int k = 0; k < 4; ++k) words.push_back(pool[rng.uniform_index(pool.size())]);
            spec.phrase = words[0] + " " + words[1] + " " + words[2] + " " + words[3];
            break;
          }
          case Richness::weak: {
            require_options();
            spec.phrase = weak_cue(*item.letter_of(target));
            break;
          }
          case Richness::strong:
            require_options();
            spec.phrase = build_phrase(template_id, target, registry);
            break;
          case Richness::llm_designed:
            require_options();
            if (!providers.textgen) {
              throw DataError("condition " + condition.id + ": llm_designed needs a text generation provider");
            }
            spec.phrase = textgen_cue(target, 10, *providers.textgen);
            break;
          case Richness::random_noise: break;
        }
      }
      if (!providers.tts) throw DataError("condition " + condition.id + ": no TTS provider configured");
      attack = construct_audio_attack(*media.audio, spec, *providers.tts);
    }
    out.audio = std::make_shared<const Waveform>(std::move(attack.attacked));
    out.injected_track = std::move(attack.injected_track);
    audio_manifest = std::move(attack.manifest);
  }

  out.frames = media.frames;
  ojson visual_manifest = nullptr;
  if (carriers.visual) {
    if (!media.frames || media.frames->frames.empty()) {
      throw DataError("item " + item.item_id + ": visual carrier needs frames");
    }
    auto visual = apply_visual_attack(*media.frames, out.plan, template_id, condition.overlay, registry);
    out.frames = std::make_shared<const FrameSet>(std::move(visual.frames));
    visual_manifest = std::move(visual.manifest);
  }

  out.prompt = item.prompt();
  if (carriers.text) {
    out.prompt = inject_prompt_distractor(out.prompt, *out.plan.text_target, template_id, condition.prompt_position,
                                          registry);
  }

  ojson m;
  m["item_id"] = item.item_id;
  m["condition"] = condition.to_json();
  m["seed"] = seed;
  m["plan"] = out.plan.to_json();
  m["audio"] = std::move(audio_manifest);
  m["visual"] = std::move(visual_manifest);
  m["prompt"] = out.prompt;
  out.manifest = std::move(m);
  return out;
}

// ---- results rows

ojson ResultRow::to_json() const {
  ojson j;
  j["item_id"] = item_id;
  j["dataset_id"] = dataset_id;
  j["model"] = model;
  j["condition"] = condition;
  j["plan_digest"] = plan_digest;
  j["status"] = ok ? "ok" : "error";
  if (!ok) j["error"] = error;
  j["record"] = record.to_json();
  if (ok) j["stealth"] = stealth.to_json();
  j["manifest"] = manifest;
  return j;
}

ResultRow ResultRow::from_json(const ojson& j) {
  ResultRow r;
  try {
    r.item_id = j.at("item_id").get<std::string>();
    r.dataset_id = j.at("dataset_id").get<std::string>();
    r.model = j.at("model").get<std::string>();
    r.condition = j.at("condition").get<std::string>();
    r.plan_digest = j.at("plan_digest").get<std::string>();
    const std::string status = j.at("status").get<std::string>();
    if (status != "ok" && status != "error") throw DataError("unknown row status '" + status + "'");
    r.ok = status == "ok";
    r.error = j.value("error", std::string{});
    r.record = EvalRecord::from_json(nlohmann::json(j.at("record")));
    if (j.contains("stealth")) r.stealth = StealthReport::from_json(j.at("stealth"));
    r.manifest = j.at("manifest");
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("result row: ") + e.what());
  }
  return r;
}

std::vector<ResultRow> read_results(std::istream& in) {
  std::vector<ResultRow> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      rows.push_back(ResultRow::from_json(ojson::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("line " + std::to_string(lineno) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

std::vector<ResultRow> read_results(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_results(in);
}

MetricsSummary summarize(const std::vector<ResultRow>& rows, std::string_view condition,
                         std::optional<QuestionModality> modality) {
  std::vector<EvalRecord> records;
  for (const auto& r : rows) {
    if (r.ok && r.condition == condition && (!modality || r.record.question_modality == *modality)) {
      records.push_back(r.record);
    }
  }
  if (records.empty()) throw DataError("no successful rows for condition '" + std::string(condition) + "'");
  return compute_metrics(records);
}

std::string plan_digest(const DatasetItem& item, const Condition& condition, std::uint64_t seed,
                        const ExperimentProviders& providers, const RunOptions& options) {
  auto ident = [](const auto& p) -> ojson { return p ? ojson(p->identity().str()) : ojson(nullptr); };
  ojson j;
  j["item"] = item.to_json();
  j["condition"] = condition.to_json();
  j["seed"] = seed;
  j["providers"] = {{"tts", ident(providers.tts)},
                    {"mllm", ident(providers.mllm)},
                    {"asr", ident(providers.asr)},
                    {"embedding", ident(providers.embedder)},
                    {"textgen", ident(providers.textgen)}};
  const auto& cfg = options.stealth_config;
  j["stealth"] = options.stealth ? ojson{{"epsilon", cfg.epsilon},
                                         {"frame_length", cfg.frame_length},
                                         {"hop_length", cfg.hop_length},
                                         {"window", std::string(to_string(cfg.window))},
                                         {"embedding_window_seconds", cfg.embedding_window_seconds},
                                         {"embedding_hop_seconds", cfg.embedding_hop_seconds}}
                                 : ojson(nullptr);
  return sha256_hex(j.dump());
}

// ---- the runner

namespace {

struct RunState {
  const std::vector<DatasetItem>& items;
  const std::vector<Condition>& conditions;
  const ExperimentProviders& providers;
  const RunOptions& options;
  std::map<std::string, std::vector<std::string>> vocab;
  std::vector<bool> needs_frames;

  std::mutex cache_mu;
  std::map<std::size_t, std::shared_future<ItemMedia>> media;
  std::map<std::string, std::shared_future<InferenceResponse>> clean;
  std::size_t clean_calls = 0;
  std::atomic<std::size_t> attacked_calls{0};

  RunState(const std::vector<DatasetItem>& i, const std::vector<Condition>& c, const ExperimentProviders& p,
           const RunOptions& o)
      : items(i), conditions(c), providers(p), options(o) {}

  template <typename T, typename Key, typename F>
  T cached(std::map<Key, std::shared_future<T>>& cache, const Key& key, F&& make, std::size_t* counter) {
    std::promise<T> promise;
    std::shared_future<T> fut;
    bool owner = false;
    {
      std::lock_guard lock(cache_mu);
      auto it = cache.find(key);
      if (it == cache.end()) {
        fut = promise.get_future().share();
        cache.emplace(key, fut);
        owner = true;
        if (counter) ++*counter;
      } else {
        fut = it->second;
      }
    }
    if (owner) {
      try {
        promise.set_value(make());
      } catch (...) {
        promise.set_exception(std::current_exception());
      }
    }
    return fut.get();
  }

  ItemMedia item_media(std::size_t i) {
    return cached(media, i, [&] { return load_item_media(items[i], needs_frames[i]); }, nullptr);
  }

  InferenceResponse clean_response(std::size_t i, const ItemMedia& m) {
    const auto& item = items[i];
    InferenceRequest req;
    req.item_id = item.item_id;
    req.prompt = item.prompt();
    req.audio = m.audio;
    if (providers.mllm->consumes_frames()) req.frames = m.frames;
    const std::string key = item.item_id + "\n" + req.prompt;
    return cached(clean, key, [&] { return mllm_infer(*providers.mllm, req, providers.audit); }, &clean_calls);
  }

  ResultRow compute(std::size_t task) {
    const std::size_t i = task / conditions.size();
    const auto& item = items[i];
    const auto& condition = conditions[task % conditions.size()];
    const std::uint64_t seed = derive_seed(options.global_seed, item.item_id);

    ResultRow row;
    row.item_id = item.item_id;
    row.dataset_id = item.dataset_id;
    row.model = providers.mllm->identity().str();
    row.condition = condition.id;
    row.plan_digest = plan_digest(item, condition, seed, providers, options);
    row.record.item_id = item.item_id;
    row.record.question_modality = item.question_modality;
    row.record.ground_truth = item.ground_truth;
    row.record.correct_letter = item.correct_letter();
    row.record.condition = condition.id;
    try {
      const auto& vocabulary = vocab.at(item.dataset_id);
      const ItemMedia m = item_media(i);
      const InferenceResponse clean_resp = clean_response(i, m);
      ConditionAttack attack =
          build_condition_attacks(item, m, vocabulary, condition, providers, seed, options.registry);

      InferenceRequest req;
      req.item_id = item.item_id;
      req.prompt = attack.prompt;
      req.audio = attack.audio;
      if (providers.mllm->consumes_frames()) req.frames = attack.frames;
      ++attacked_calls;
      const InferenceResponse resp = mllm_infer(*providers.mllm, req, providers.audit);

      row.record.audio_target = attack.plan.audio_target;
      row.record.visual_target = attack.plan.visual_target;
      row.record.text_target = attack.plan.text_target;
      row.record.candidate_labels = condition.safety_cue != SafetyCue::none
                                        ? std::vector<std::string>{"harmful", "harmless"}
                                        : item.multiple_choice() ? option_contents(item) : vocabulary;
      row.record.clean_prediction = clean_resp.text;
      row.record.attacked_prediction = resp.text;
      if (options.stealth) {
        if (attack.injected_track) {
          row.stealth = stealth_report(*m.audio, *attack.injected_track, *attack.audio,
                                       {providers.embedder.get(), providers.asr.get()}, options.stealth_config);
        } else {
          row.stealth.diagnostics.push_back("no audio carrier");
        }
      }
      row.manifest = std::move(attack.manifest);
    } catch (const ProviderError& e) {
      if (e.outage()) throw;
      row.ok = false;
      row.error = e.what();
    } catch (const Error& e) {
      row.ok = false;
      row.error = e.what();
    }
    return row;
  }
};

RunOutcome run_core(const std::vector<DatasetItem>& items, const std::vector<Condition>& conditions,
                    const ExperimentProviders& providers, const RunOptions& options, std::vector<ResultRow> prefix,
                    std::ostream* out) {
  if (items.empty()) throw DataError("no items to run");
  if (conditions.empty()) throw DataError("no conditions to run");
  if (!providers.mllm) throw DataError("no model provider configured");
  if (options.parallelism < 1) throw UsageError("parallelism must be >= 1");
  std::set<std::string> ids;
  for (const auto& c : conditions) {
    c.validate();
    if (!ids.insert(c.id).second) throw DataError("duplicate condition id '" + c.id + "'");
  }

  RunState state(items, conditions, providers, options);
  bool any_visual = false;
  for (const auto& c : conditions) any_visual = any_visual || carriers_of(c.mode).visual;
  for (const auto& item : items) {
    if (!state.vocab.contains(item.dataset_id)) state.vocab[item.dataset_id] = dataset_vocabulary(items, item.dataset_id);
    state.needs_frames.push_back(any_visual || providers.mllm->consumes_frames());
  }

  const std::size_t total = items.size() * conditions.size();
  RunOutcome outcome;
  outcome.reused = prefix.size();
  outcome.rows = std::move(prefix);
  std::size_t end = total;
  if (options.max_new_records) end = std::min(total, outcome.reused + *options.max_new_records);

  std::mutex write_mu;
  std::map<std::size_t, ResultRow> pending;
  std::size_t next_write = outcome.reused;
  std::atomic<std::size_t> next_task{outcome.reused};
  std::atomic<bool> halted{false};
  std::exception_ptr failure;

  auto emit = [&](std::size_t task, ResultRow row) {
    std::lock_guard lock(write_mu);
    pending.emplace(task, std::move(row));
    for (auto it = pending.find(next_write); it != pending.end(); it = pending.find(next_write)) {
      if (out) {
        *out << it->second.to_json().dump() << '\n';
        out->flush();
      }
      outcome.rows.push_back(std::move(it->second));
      pending.erase(it);
      ++next_write;
      ++outcome.computed;
    }
  };

  auto worker = [&] {
    while (!halted) {
      const std::size_t task = next_task++;
      if (task >= end) return;
      try {
        emit(task, state.compute(task));
      } catch (...) {
        std::lock_guard lock(write_mu);
        if (!failure) failure = std::current_exception();
        halted = true;
      }
    }
  };

  const int threads = static_cast<int>(std::min<std::size_t>(options.parallelism, std::max<std::size_t>(end - outcome.reused, 1)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  outcome.clean_calls = state.clean_calls;
  outcome.attacked_calls = state.attacked_calls;
  outcome.complete = outcome.rows.size() == total;
  return outcome;
}

}  // namespace

RunOutcome run_experiment(const std::vector<DatasetItem>& items, const std::vector<Condition>& conditions,
                          const ExperimentProviders& providers, const RunOptions& options, std::ostream* out) {
  return run_core(items, conditions, providers, options, {}, out);
}

RunOutcome run_experiment(const std::vector<DatasetItem>& items, const std::vector<Condition>& conditions,
                          const ExperimentProviders& providers, const RunOptions& options,
                          const fs::path& results_path) {
  std::vector<ResultRow> prefix;
  std::uintmax_t keep_bytes = 0;
  if (fs::exists(results_path)) {
    std::ifstream in(results_path, std::ios::binary);
    std::string line;
    std::uintmax_t offset = 0;
    while (std::getline(in, line)) {
      if (in.eof()) break;  // no trailing newline: a torn write
      const std::size_t task = prefix.size();
      if (task >= items.size() * conditions.size()) break;
      const auto& item = items[task / conditions.size()];
      const auto& condition = conditions[task % conditions.size()];
      ResultRow row;
      try {
        row = ResultRow::from_json(ojson::parse(line));
      } catch (const std::exception&) {
        break;
      }
      const std::uint64_t seed = derive_seed(options.global_seed, item.item_id);
      if (row.item_id != item.item_id || row.condition != condition.id ||
          row.plan_digest != plan_digest(item, condition, seed, providers, options)) {
        break;
      }
      offset += line.size() + 1;
      keep_bytes = offset;
      prefix.push_back(std::move(row));
    }
    in.close();
    fs::resize_file(results_path, keep_bytes);
  }
  std::ofstream out(results_path, std::ios::binary | std::ios::app);
  if (!out) throw DataError("cannot write " + results_path.string());
  return run_core(items, conditions, providers, options, std::move(prefix), &out);
}

ExperimentProviders mock_providers(const std::vector<DatasetItem>& items, double asr_threshold,
                                   std::vector<std::string> textgen_replies) {
  std::vector<std::string> vocabulary;
  std::set<std::string> seen;
  std::map<std::string, std::string> truth;
  auto add = [&](const std::string& label) {
    if (seen.insert(normalize_label(label)).second) vocabulary.push_back(label);
  };
  std::set<std::string> datasets;
  for (const auto& item : items) {
    datasets.insert(item.dataset_id);
    truth[item.item_id] = item.ground_truth;
  }
  for (const auto& d : datasets) {
    for (const auto& label : dataset_vocabulary(items, d)) add(label);
  }
  add("harmful");
  add("harmless");
  std::vector<std::string> lexicon = vocabulary;
  lexicon.insert(lexicon.end(), random_speech_nouns().begin(), random_speech_nouns().end());

  ExperimentProviders p;
  p.tts = std::make_shared<CachedTts>(std::make_shared<DeterministicTts>());
  auto asr = std::make_shared<DeterministicAsr>(lexicon, asr_threshold);
  p.asr = asr;
  p.embedder = std::make_shared<DeterministicEmbedder>();
  p.mllm = std::make_shared<TranscriptFollowerMllm>(asr, vocabulary, std::move(truth));
  p.textgen = std::make_shared<ScriptedTextGen>(std::move(textgen_replies));
  return p;
}

}  // namespace typostrike
