#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "typostrike/audio.hpp"
#include "typostrike/providers.hpp"
#include "typostrike/templates.hpp"

namespace typostrike {

inline constexpr std::string_view kDefaultVoice = "en-US-JennyNeural";
inline constexpr double kDefaultVolumeMultiplier = 2.0;
// Loudness target for volume_policy when the original clip is silent.
inline constexpr double kSilentReferenceRms = 0.1;

struct FixedCount {
  int count = 1;
  bool operator==(const FixedCount&) const = default;
};
struct FillDuration {
  bool operator==(const FillDuration&) const = default;
};
using RepetitionPolicy = std::variant<FixedCount, FillDuration>;

std::string to_string(const RepetitionPolicy& policy);
RepetitionPolicy parse_repetition(std::string_view text);  // "fill" or a positive integer

// Recipe for one spoken injection. Defaults follow the standard attack setup:
// Jenny voice, multiplier 2, repeated over the whole clip.
struct InjectionSpec {
  std::string phrase;
  std::string voice = std::string(kDefaultVoice);
  double volume_multiplier = kDefaultVolumeMultiplier;
  double placement_fraction = 0.0;
  RepetitionPolicy repetition = FillDuration{};
  std::string target_label;

  void validate() const;
  nlohmann::ordered_json to_json() const;
  static InjectionSpec from_json(const nlohmann::ordered_json& j);

  bool operator==(const InjectionSpec&) const = default;
};

enum class AttackMode { audio_only, visual_only, text_only, aligned, conflicting };

std::string_view to_string(AttackMode mode);
AttackMode parse_attack_mode(std::string_view name);

struct MultiModalPlan {
  AttackMode mode = AttackMode::audio_only;
  std::optional<std::string> audio_target;
  std::optional<std::string> visual_target;
  std::optional<std::string> text_target;
  std::uint64_t rng_seed = 0;

  // Checks the mode invariants and that no target equals the ground truth.
  void validate(std::string_view ground_truth) const;
  nlohmann::ordered_json to_json() const;
  static MultiModalPlan from_json(const nlohmann::ordered_json& j);

  bool operator==(const MultiModalPlan&) const = default;
};

Waveform synthesize_speech(std::string_view phrase, std::string_view voice, TtsProvider& tts);

std::vector<std::size_t> schedule_repetitions(std::size_t inj_len, std::size_t total_len, double placement_fraction,
                                              const RepetitionPolicy& policy);

// Normalises inj to the RMS of orig (kSilentReferenceRms when orig is
// silent) and scales by `multiplier`.
Waveform volume_policy(const Waveform& inj, const Waveform& orig, double multiplier);

struct AudioAttack {
  Waveform attacked;
  Waveform injected_track;  // attacked - orig, same length as orig
  nlohmann::ordered_json manifest;
};

// Places an already-rendered injection: volume_policy, scheduling, mixing.
// `source` describes where the injection came from and is copied into the
// manifest fragment.
AudioAttack inject_waveform(const Waveform& orig, const Waveform& injection, const InjectionSpec& spec,
                            nlohmann::ordered_json source);

// Seeded uniform white noise in [-1, 1), identical on every platform.
Waveform white_noise(std::size_t count, std::uint64_t seed, int sample_rate = kCanonicalSampleRate);
// Manifest source block for a white_noise injection.
nlohmann::ordered_json noise_source(std::uint64_t seed, std::size_t length);

AudioAttack construct_audio_attack(const Waveform& orig, const InjectionSpec& spec, TtsProvider& tts);

// Rebuilds the attack described by a manifest fragment produced by
// construct_audio_attack or by inject_waveform with a white_noise source. The result is bit-identical when the TTS
// provider is deterministic.
AudioAttack replay_audio_attack(const Waveform& orig, const nlohmann::ordered_json& fragment, TtsProvider& tts);

enum class PromptPosition { prefix, suffix };

std::string_view to_string(PromptPosition position);
PromptPosition parse_prompt_position(std::string_view name);

// Not idempotent: every call adds another cue sentence.
std::string inject_prompt_distractor(std::string_view prompt, std::string_view target, std::string_view template_id,
                                     PromptPosition position = PromptPosition::suffix,
                                     const TemplateRegistry& registry = TemplateRegistry::builtin());

MultiModalPlan assign_targets(std::string_view ground_truth, const std::vector<std::string>& vocabulary,
                              AttackMode mode, std::uint64_t rng_seed);

}  // namespace typostrike
