#include "typostrike/injection.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "typostrike/digest.hpp"
#include "typostrike/error.hpp"
#include "typostrike/rng.hpp"
#include "typostrike/text.hpp"

namespace typostrike {

std::string to_string(const RepetitionPolicy& policy) {
  if (const auto* fixed = std::get_if<FixedCount>(&policy)) return std::to_string(fixed->count);
  return "fill";
}

RepetitionPolicy parse_repetition(std::string_view text) {
  if (text == "fill" || text == "fill_duration") return FillDuration{};
  int n = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
  if (ec != std::errc{} || ptr != text.data() + text.size() || n < 1) {
    throw DataError("repetition must be 'fill' or a positive integer, got '" + std::string(text) + "'");
  }
  return FixedCount{n};
}

void InjectionSpec::validate() const {
  if (phrase.empty()) throw DataError("injection phrase must be non-empty");
  if (!std::isfinite(volume_multiplier) || volume_multiplier < 0.0) throw DataError("invalid gain");
  if (!(placement_fraction >= 0.0 && placement_fraction <= 1.0)) {
    throw DataError("placement fraction must lie in [0, 1]");
  }
  if (const auto* fixed = std::get_if<FixedCount>(&repetition); fixed && fixed->count < 1) {
    throw DataError("repetition count must be >= 1");
  }
}

nlohmann::ordered_json InjectionSpec::to_json() const {
  nlohmann::ordered_json j;
  j["phrase"] = phrase;
  j["voice"] = voice;
  j["volume_multiplier"] = volume_multiplier;
  j["placement_fraction"] = placement_fraction;
  if (const auto* fixed = std::get_if<FixedCount>(&repetition)) {
    j["repetition"] = {{"policy", "fixed_count"}, {"count", fixed->count}};
  } else {
    j["repetition"] = {{"policy", "fill_duration"}};
  }
  j["target_label"] = target_label;
  return j;
}

InjectionSpec InjectionSpec::from_json(const nlohmann::ordered_json& j) {
  InjectionSpec spec;
  try {
    spec.phrase = j.at("phrase").get<std::string>();
    spec.voice = j.value("voice", spec.voice);
    spec.volume_multiplier = j.value("volume_multiplier", spec.volume_multiplier);
    spec.placement_fraction = j.value("placement_fraction", spec.placement_fraction);
    spec.target_label = j.value("target_label", std::string{});
    if (j.contains("repetition")) {
      const auto& r = j.at("repetition");
      const std::string policy = r.value("policy", std::string("fill_duration"));
      if (policy == "fixed_count") {
        spec.repetition = FixedCount{r.at("count").get<int>()};
      } else if (policy == "fill_duration") {
        spec.repetition = FillDuration{};
      } else {
        throw DataError("unknown repetition policy '" + policy + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("injection spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

std::string_view to_string(AttackMode mode) {
  switch (mode) {
    case AttackMode::audio_only: return "audio_only";
    case AttackMode::visual_only: return "visual_only";
    case AttackMode::text_only: return "text_only";
    case AttackMode::aligned: return "aligned";
    case AttackMode::conflicting: return "conflicting";
  }
  return "audio_only";
}

AttackMode parse_attack_mode(std::string_view name) {
  for (auto m : {AttackMode::audio_only, AttackMode::visual_only, AttackMode::text_only, AttackMode::aligned,
                 AttackMode::conflicting}) {
    if (to_string(m) == name) return m;
  }
  throw DataError("unknown attack mode '" + std::string(name) + "'");
}

void MultiModalPlan::validate(std::string_view ground_truth) const {
  auto require = [&](const std::optional<std::string>& t, const char* which) {
    if (!t || t->empty()) {
      throw DataError(std::string(to_string(mode)) + " plan requires a " + which + " target");
    }
  };
  switch (mode) {
    case AttackMode::audio_only: require(audio_target, "audio"); break;
    case AttackMode::visual_only: require(visual_target, "visual"); break;
    case AttackMode::text_only: require(text_target, "text"); break;
    case AttackMode::aligned:
      require(audio_target, "audio");
      require(visual_target, "visual");
      if (!same_label(*audio_target, *visual_target)) throw DataError("aligned plan needs identical targets");
      break;
    case AttackMode::conflicting:
      require(audio_target, "audio");
      require(visual_target, "visual");
      if (same_label(*audio_target, *visual_target)) throw DataError("conflicting plan needs distinct targets");
      break;
  }
  for (const auto* t : {&audio_target, &visual_target, &text_target}) {
    if (*t && same_label(**t, ground_truth)) throw DataError("injected target equals the ground truth");
  }
}

nlohmann::ordered_json MultiModalPlan::to_json() const {
  nlohmann::ordered_json j;
  j["mode"] = std::string(to_string(mode));
  j["audio_target"] = audio_target ? nlohmann::ordered_json(*audio_target) : nlohmann::ordered_json(nullptr);
  j["visual_target"] = visual_target ? nlohmann::ordered_json(*visual_target) : nlohmann::ordered_json(nullptr);
  j["text_target"] = text_target ? nlohmann::ordered_json(*text_target) : nlohmann::ordered_json(nullptr);
  j["rng_seed"] = rng_seed;
  return j;
}

MultiModalPlan MultiModalPlan::from_json(const nlohmann::ordered_json& j) {
  MultiModalPlan plan;
  auto opt = [&](const char* key) -> std::optional<std::string> {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<std::string>();
  };
  try {
    plan.mode = parse_attack_mode(j.at("mode").get<std::string>());
    plan.audio_target = opt("audio_target");
    plan.visual_target = opt("visual_target");
    plan.text_target = opt("text_target");
    plan.rng_seed = j.value("rng_seed", std::uint64_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("plan: ") + e.what());
  }
  return plan;
}

Waveform synthesize_speech(std::string_view phrase, std::string_view voice, TtsProvider& tts) {
  if (phrase.empty()) throw DataError("cannot synthesize an empty phrase");
  const std::string_view v = voice.empty() ? kDefaultVoice : voice;
  Waveform raw = tts.synthesize(phrase, v);
  if (raw.empty()) throw ProviderError("empty synthesis");
  return raw.sample_rate() == kCanonicalSampleRate ? raw : resample(raw, kCanonicalSampleRate);
}

namespace {

std::size_t placement_offset(double fraction, std::size_t total_len) {
  const double exact = fraction * static_cast<double>(total_len);
  const double nearest = std::round(exact);
  // 0.29 * 100 evaluates to 28.999999999999996; treat such cases as the integer.
  if (std::abs(exact - nearest) < 1e-9 * std::max(1.0, exact)) return static_cast<std::size_t>(nearest);
  return static_cast<std::size_t>(std::floor(exact));
}

}  // namespace

std::vector<std::size_t> schedule_repetitions(std::size_t inj_len, std::size_t total_len, double placement_fraction,
                                              const RepetitionPolicy& policy) {
  if (inj_len == 0) throw DataError("injection length must be positive");
  if (total_len == 0) throw DataError("clip length must be positive");
  std::vector<std::size_t> offsets;
  if (std::holds_alternative<FillDuration>(policy)) {
    for (std::size_t off = 0; off < total_len; off += inj_len) offsets.push_back(off);
    return offsets;
  }
  const int count = std::get<FixedCount>(policy).count;
  if (count < 1) throw DataError("repetition count must be >= 1");
  if (!(placement_fraction >= 0.0 && placement_fraction <= 1.0)) {
    throw DataError("placement fraction must lie in [0, 1]");
  }
  const std::size_t start = placement_offset(placement_fraction, total_len);
  for (int k = 0; k < count; ++k) {
    const std::size_t off = start + static_cast<std::size_t>(k) * inj_len;
    if (off >= total_len) break;  // copies starting past the end are dropped entirely
    offsets.push_back(off);
  }
  return offsets;
}

Waveform volume_policy(const Waveform& inj, const Waveform& orig, double multiplier) {
  if (!std::isfinite(multiplier) || multiplier < 0.0) throw DataError("invalid gain");
  const double inj_rms = rms(inj);
  if (inj_rms == 0.0) throw DataError("silent injection");
  const double orig_rms = orig.empty() ? 0.0 : rms(orig);
  const double reference = orig_rms > 0.0 ? orig_rms : kSilentReferenceRms;
  return apply_gain(inj, reference / inj_rms * multiplier);
}

AudioAttack inject_waveform(const Waveform& orig, const Waveform& injection, const InjectionSpec& spec,
                            nlohmann::ordered_json source) {
  spec.validate();
  if (orig.empty()) throw DataError("original audio is empty");
  if (orig.sample_rate() != injection.sample_rate()) throw DataError("rate mismatch");
  const Waveform scaled = volume_policy(injection, orig, spec.volume_multiplier);
  const auto offsets = schedule_repetitions(scaled.size(), orig.size(), spec.placement_fraction, spec.repetition);

  Waveform track = Waveform::zeros(orig.size(), orig.sample_rate());
  for (std::size_t off : offsets) track = mix(track, scaled, off);
  Waveform attacked = mix(orig, track, 0);

  nlohmann::ordered_json m;
  m["spec"] = spec.to_json();
  m["source"] = std::move(source);
  m["sample_rate"] = orig.sample_rate();
  m["resampling"] = "linear";
  m["clipping"] = "export_only";
  m["gain_reference"] = "rms_matched";
  m["original_rms"] = rms(orig);
  m["injection_length"] = scaled.size();
  m["offsets"] = offsets;
  m["spacing_samples"] = 0;
  m["scaled_injection_digest"] = waveform_digest(scaled);
  m["injected_track_digest"] = waveform_digest(track);
  m["attacked_digest"] = waveform_digest(attacked);
  return AudioAttack{std::move(attacked), std::move(track), std::move(m)};
}

nlohmann::ordered_json noise_source(std::uint64_t seed, std::size_t length) {
  nlohmann::ordered_json j;
  j["type"] = "noise";
  j["seed"] = seed;
  j["length"] = length;
  return j;
}

Waveform white_noise(std::size_t count, std::uint64_t seed, int sample_rate) {
  Rng rng(seed);
  std::vector<double> samples(count);
  for (double& s : samples) s = rng.uniform(-1.0, 1.0);
  return Waveform(std::move(samples), sample_rate);
}

AudioAttack construct_audio_attack(const Waveform& orig, const InjectionSpec& spec, TtsProvider& tts) {
  spec.validate();
  const Waveform speech = synthesize_speech(spec.phrase, spec.voice, tts);
  nlohmann::ordered_json source;
  source["type"] = "tts";
  source["provider"] = tts.identity().str();
  source["synthesized_digest"] = waveform_digest(speech);
  return inject_waveform(orig, speech, spec, std::move(source));
}

AudioAttack replay_audio_attack(const Waveform& orig, const nlohmann::ordered_json& fragment, TtsProvider& tts) {
  const InjectionSpec spec = InjectionSpec::from_json(fragment.at("spec"));
  const auto& source = fragment.at("source");
  const std::string type = source.value("type", std::string("tts"));
  if (type == "tts") return construct_audio_attack(orig, spec, tts);
  if (type == "noise") {
    const auto length = source.at("length").get<std::size_t>();
    const auto seed = source.at("seed").get<std::uint64_t>();
    return inject_waveform(orig, white_noise(length, seed, orig.sample_rate()), spec, noise_source(seed, length));
  }
  throw DataError("cannot replay an injection of source type '" + type + "' from a fragment alone");
}

std::string_view to_string(PromptPosition position) {
  return position == PromptPosition::prefix ? "prefix" : "suffix";
}

PromptPosition parse_prompt_position(std::string_view name) {
  if (name == "prefix") return PromptPosition::prefix;
  if (name == "suffix") return PromptPosition::suffix;
  throw DataError("prompt position must be prefix or suffix");
}

std::string inject_prompt_distractor(std::string_view prompt, std::string_view target, std::string_view template_id,
                                     PromptPosition position, const TemplateRegistry& registry) {
  if (prompt.empty()) throw DataError("prompt must be non-empty");
  if (target.empty()) throw DataError("distractor target must be non-empty");
  const std::string cue = build_phrase(template_id, target, registry);
  if (position == PromptPosition::prefix) return cue + " " + std::string(prompt);
  return std::string(prompt) + " " + cue;
}

MultiModalPlan assign_targets(std::string_view ground_truth, const std::vector<std::string>& vocabulary,
                              AttackMode mode, std::uint64_t rng_seed) {
  std::vector<std::string> labels;
  for (const auto& v : vocabulary) {
    if (v.empty()) continue;
    if (std::none_of(labels.begin(), labels.end(), [&](const std::string& l) { return same_label(l, v); })) {
      labels.push_back(v);
    }
  }
  const auto candidates = std::count_if(labels.begin(), labels.end(),
                                        [&](const std::string& l) { return !same_label(l, ground_truth); });
  const long needed = mode == AttackMode::conflicting ? 2 : 1;
  if (candidates < needed) {
    throw DataError("vocabulary too small for " + std::string(to_string(mode)) + " mode: need " +
                    std::to_string(needed) + " label(s) besides the ground truth");
  }

  Rng rng(rng_seed);
  auto draw = [&](const std::string* exclude) {
    while (true) {
      const std::string& pick = labels[rng.uniform_index(labels.size())];
      if (same_label(pick, ground_truth)) continue;
      if (exclude != nullptr && same_label(pick, *exclude)) continue;
      return pick;
    }
  };

  MultiModalPlan plan;
  plan.mode = mode;
  plan.rng_seed = rng_seed;
  const std::string first = draw(nullptr);
  switch (mode) {
    case AttackMode::audio_only: plan.audio_target = first; break;
    case AttackMode::visual_only: plan.visual_target = first; break;
    case AttackMode::text_only: plan.text_target = first; break;
    case AttackMode::aligned:
      plan.audio_target = first;
      plan.visual_target = first;
      break;
    case AttackMode::conflicting:
      plan.audio_target = first;
      plan.visual_target = draw(&first);
      break;
  }
  return plan;
}

}  // namespace typostrike
