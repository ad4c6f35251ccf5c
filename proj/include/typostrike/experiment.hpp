#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "typostrike/eval.hpp"
#include "typostrike/image.hpp"
#include "typostrike/injection.hpp"
#include "typostrike/providers.hpp"
#include "typostrike/stealth.hpp"
#include "typostrike/visual.hpp"

namespace typostrike {

struct AnswerOption {
  std::string letter;
  std::string content;
  bool operator==(const AnswerOption&) const = default;
};

// One benchmark question. For option datasets ground_truth holds the
// correct option's content.
struct DatasetItem {
  std::string item_id;
  std::string dataset_id;
  std::vector<std::filesystem::path> frames;
  std::filesystem::path audio;
  std::string question;
  QuestionModality question_modality = QuestionModality::audio;
  std::string ground_truth;
  std::optional<std::vector<AnswerOption>> options;

  bool multiple_choice() const { return options.has_value(); }
  std::optional<std::string> correct_letter() const;
  std::optional<std::string> letter_of(std::string_view content) const;
  // Question followed by one "X. content" line per option.
  std::string prompt() const;

  nlohmann::ordered_json to_json() const;
  bool operator==(const DatasetItem&) const = default;
};

// Reads a JSONL manifest. Relative media paths resolve against the
// manifest's directory and must exist.
std::vector<DatasetItem> ingest_dataset(const std::filesystem::path& manifest);
std::vector<DatasetItem> parse_dataset(std::istream& in, const std::filesystem::path& base_dir);

// Labels a model may answer with for items of one dataset: option contents
// for option datasets, otherwise every ground truth of the dataset.
std::vector<std::string> dataset_vocabulary(const std::vector<DatasetItem>& items, std::string_view dataset_id);

struct ItemMedia {
  std::shared_ptr<const Waveform> audio;
  std::shared_ptr<const FrameSet> frames;  // null when not loaded
};

// Audio at the canonical rate; frames spread evenly over the audio duration.
ItemMedia load_item_media(const DatasetItem& item, bool with_frames);

enum class Richness { none, random_noise, random_speech, weak, strong, llm_designed };
enum class SafetyCue { none, keyword, prompt };

std::string_view to_string(Richness r);
Richness parse_richness(std::string_view name);
std::string_view to_string(SafetyCue c);
SafetyCue parse_safety_cue(std::string_view name);

// The fixed list of 100 unrelated nouns used for the random-speech control.
const std::vector<std::string>& random_speech_nouns();

struct Carriers {
  bool audio = false;
  bool visual = false;
  bool text = false;
};
Carriers carriers_of(AttackMode mode);

// One attack configuration applied to every item. `injection.phrase` and
// `injection.target_label` are filled per item.
struct Condition {
  std::string id;
  AttackMode mode = AttackMode::audio_only;
  Richness richness = Richness::none;
  SafetyCue safety_cue = SafetyCue::none;
  InjectionSpec injection;
  std::string template_id;  // empty: the item's dataset id
  PromptPosition prompt_position = PromptPosition::suffix;
  OverlaySpec overlay;

  void validate() const;
  nlohmann::ordered_json to_json() const;
  static Condition from_json(const nlohmann::ordered_json& j);
  bool operator==(const Condition&) const = default;
};

std::vector<Condition> load_conditions(const std::filesystem::path& path);

struct ExperimentProviders {
  std::shared_ptr<TtsProvider> tts;
  std::shared_ptr<MllmProvider> mllm;
  std::shared_ptr<AsrProvider> asr;            // stealth speech shift
  std::shared_ptr<EmbeddingProvider> embedder; // stealth embedding shift
  std::shared_ptr<TextGenProvider> textgen;    // llm_designed cues
  AuditLog* audit = nullptr;
};

struct ConditionAttack {
  MultiModalPlan plan;
  std::shared_ptr<const Waveform> audio;
  std::optional<Waveform> injected_track;  // set when the audio carries an injection
  std::shared_ptr<const FrameSet> frames;
  std::string prompt;
  nlohmann::ordered_json manifest;
};

ConditionAttack build_condition_attacks(const DatasetItem& item, const ItemMedia& media,
                                        const std::vector<std::string>& vocabulary, const Condition& condition,
                                        const ExperimentProviders& providers, std::uint64_t seed,
                                        const TemplateRegistry& registry = TemplateRegistry::builtin());

struct RunOptions {
  std::uint64_t global_seed = 0;
  int parallelism = 1;
  bool stealth = true;
  StealthConfig stealth_config;
  TemplateRegistry registry = TemplateRegistry::builtin();
  // Stop after this many newly computed rows, leaving a valid prefix behind
  // (used to exercise resume).
  std::optional<std::size_t> max_new_records;
};

struct ResultRow {
  std::string item_id;
  std::string dataset_id;
  std::string model;  // identity of the answering model
  std::string condition;
  std::string plan_digest;
  bool ok = true;
  std::string error;
  EvalRecord record;
  StealthReport stealth;
  nlohmann::ordered_json manifest;

  nlohmann::ordered_json to_json() const;
  static ResultRow from_json(const nlohmann::ordered_json& j);
};

struct RunOutcome {
  std::vector<ResultRow> rows;  // canonical (item, condition) order
  std::size_t reused = 0;       // rows taken from an existing results file
  std::size_t computed = 0;
  std::size_t clean_calls = 0;
  std::size_t attacked_calls = 0;
  bool complete = false;
};

// Digest of everything that determines one row: item, condition, derived
// seed, provider identities and stealth settings.
std::string plan_digest(const DatasetItem& item, const Condition& condition, std::uint64_t seed,
                        const ExperimentProviders& providers, const RunOptions& options);

// Runs every (item, condition) pair. Rows are written to `out` in canonical
// order as they complete. Per-row failures become rows with ok = false; an
// endpoint outage stops the run after flushing the finished prefix and
// rethrows.
RunOutcome run_experiment(const std::vector<DatasetItem>& items, const std::vector<Condition>& conditions,
                          const ExperimentProviders& providers, const RunOptions& options,
                          std::ostream* out = nullptr);

// File-backed run. Rows already present whose digests match the plan are
// kept; a partial or stale tail is dropped and recomputed.
RunOutcome run_experiment(const std::vector<DatasetItem>& items, const std::vector<Condition>& conditions,
                          const ExperimentProviders& providers, const RunOptions& options,
                          const std::filesystem::path& results_path);

std::vector<ResultRow> read_results(const std::filesystem::path& path);
std::vector<ResultRow> read_results(std::istream& in);

// Metrics of the ok rows of one condition, optionally restricted to one
// question modality.
MetricsSummary summarize(const std::vector<ResultRow>& rows, std::string_view condition,
                         std::optional<QuestionModality> modality = std::nullopt);

// Mock providers wired for a dataset: vocabulary from the items, ground
// truth per item id, lexicon covering vocabulary and random-speech nouns.
ExperimentProviders mock_providers(const std::vector<DatasetItem>& items, double asr_threshold = 0.5,
                                   std::vector<std::string> textgen_replies = {"think about the second choice"});

// ---- sweeps and the trade-off frontier

enum class SweepAxis { volume, position, repetition, voice };

std::string_view to_string(SweepAxis a);
SweepAxis parse_sweep_axis(std::string_view name);

struct SweepGrid {
  SweepAxis axis = SweepAxis::volume;
  std::vector<std::string> values;

  static SweepGrid default_grid(SweepAxis axis);
  void validate() const;
  // base with the swept field set to values[i]; the id gets "@axis=value".
  Condition apply(const Condition& base, std::size_t i) const;
};

struct StealthMeans {
  std::optional<double> rel_rms;
  std::optional<double> speech_recognition_rate;
  std::optional<double> entropy_shift;
  std::optional<double> flatness_shift;
  std::optional<double> embedding_variance_shift;
};

StealthMeans mean_stealth(const std::vector<ResultRow>& rows);

struct SweepPoint {
  std::string value;
  Condition condition;
  MetricsSummary overall;
  std::map<QuestionModality, MetricsSummary> by_modality;
  StealthMeans stealth;
};

struct SweepResult {
  SweepGrid grid;
  std::vector<SweepPoint> points;
};

SweepResult run_sweep(const std::vector<DatasetItem>& items, const SweepGrid& grid, const Condition& base,
                      const ExperimentProviders& providers, const RunOptions& options,
                      const std::optional<std::filesystem::path>& results_dir = std::nullopt);

struct FrontierPoint {
  std::string family;
  std::string value;
  double avg_task_accuracy = 0.0;
  StealthMeans stealth;
};

// Average task accuracy is the mean of the attacked accuracies of the audio
// and visual question subsets, or the one present subset's accuracy.
std::vector<FrontierPoint> tradeoff_frontier(const std::vector<SweepResult>& sweeps);

enum class StealthAxis { rel_rms, speech_recognition_rate, entropy_shift, flatness_shift, embedding_variance_shift };

std::string_view to_string(StealthAxis a);
StealthAxis parse_stealth_axis(std::string_view name);
std::optional<double> stealth_value(const StealthMeans& m, StealthAxis axis);

// Spearman correlation with average ranks for ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y);
// Between the stealth axis and average task accuracy over points that have
// the axis.
double rank_correlation(const std::vector<FrontierPoint>& points, StealthAxis axis);

}  // namespace typostrike
