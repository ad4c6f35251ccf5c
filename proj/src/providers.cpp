#include "typostrike/providers.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <random>
#include <sstream>

#include "typostrike/digest.hpp"

namespace typostrike {

std::string_view to_string(ProviderKind kind) {
  switch (kind) {
    case ProviderKind::tts: return "tts";
    case ProviderKind::asr: return "asr";
    case ProviderKind::embedding: return "embedding";
    case ProviderKind::mllm: return "mllm";
    case ProviderKind::textgen: return "textgen";
  }
  return "mllm";
}

ProviderKind parse_provider_kind(std::string_view name) {
  for (auto k : {ProviderKind::tts, ProviderKind::asr, ProviderKind::embedding, ProviderKind::mllm,
                 ProviderKind::textgen}) {
    if (to_string(k) == name) return k;
  }
  throw DataError("unknown provider kind '" + std::string(name) + "'");
}

void ProviderEndpoint::validate() const {
  const std::string k(to_string(kind));
  if (base_url.empty()) throw DataError(k + " endpoint: base address is required");
  if (!(timeout_seconds > 0.0)) throw DataError(k + " endpoint: timeout must be positive");
  if (max_retries < 0) throw DataError(k + " endpoint: retries must be >= 0");
  if (max_in_flight < 1) throw DataError(k + " endpoint: in-flight cap must be >= 1");
}

nlohmann::ordered_json ProviderEndpoint::to_json() const {
  nlohmann::ordered_json j;
  j["kind"] = std::string(to_string(kind));
  j["base_url"] = base_url;
  j["token_env"] = token_env;
  j["model"] = model;
  j["timeout_seconds"] = timeout_seconds;
  j["max_retries"] = max_retries;
  j["max_in_flight"] = max_in_flight;
  return j;
}

ProviderEndpoint ProviderEndpoint::from_json(ProviderKind kind, const nlohmann::json& j) {
  if (!j.is_object()) throw DataError(std::string(to_string(kind)) + " endpoint must be a JSON object");
  ProviderEndpoint ep;
  ep.kind = kind;
  try {
    ep.base_url = j.value("base_url", std::string{});
    ep.token_env = j.value("token_env", std::string{});
    ep.model = j.value("model", std::string{});
    ep.timeout_seconds = j.value("timeout_seconds", ep.timeout_seconds);
    ep.max_retries = j.value("max_retries", ep.max_retries);
    ep.max_in_flight = j.value("max_in_flight", ep.max_in_flight);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string(to_string(kind)) + " endpoint: " + e.what());
  }
  ep.validate();
  return ep;
}

std::optional<ProviderEndpoint> ProviderEndpoint::from_env(ProviderKind kind) {
  std::string upper(to_string(kind));
  std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
  const char* url = std::getenv(("TYPOSTRIKE_" + upper + "_URL").c_str());
  if (url == nullptr || *url == '\0') return std::nullopt;
  ProviderEndpoint ep;
  ep.kind = kind;
  ep.base_url = url;
  if (const char* tok = std::getenv(("TYPOSTRIKE_" + upper + "_TOKEN_ENV").c_str())) ep.token_env = tok;
  return ep;
}

std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int retry_index) {
  thread_local std::mt19937_64 jitter_rng{std::random_device{}()};
  const double base = static_cast<double>(policy.base_delay.count()) * std::ldexp(1.0, std::min(retry_index, 30));
  const double capped = std::min(base, static_cast<double>(policy.max_delay.count()));
  const double factor = 1.0 + policy.jitter * std::uniform_real_distribution<double>(0.0, 1.0)(jitter_rng);
  return std::chrono::milliseconds(static_cast<std::int64_t>(capped * factor));
}

InFlightLimiter::InFlightLimiter(int capacity) : capacity_(capacity) {
  if (capacity < 1) throw DataError("in-flight cap must be >= 1");
}

InFlightLimiter::Permit InFlightLimiter::acquire() {
  std::unique_lock lock(mu_);
  const std::uint64_t ticket = next_ticket_++;
  cv_.wait(lock, [&] { return ticket == serving_ && in_flight_ < capacity_; });
  ++serving_;
  ++in_flight_;
  peak_ = std::max(peak_, in_flight_);
  cv_.notify_all();  // the next ticket may also fit
  return Permit(this);
}

void InFlightLimiter::release() {
  {
    std::lock_guard lock(mu_);
    --in_flight_;
  }
  cv_.notify_all();
}

InFlightLimiter::Permit::~Permit() {
  if (owner_ != nullptr) owner_->release();
}

int InFlightLimiter::in_flight() const {
  std::lock_guard lock(mu_);
  return in_flight_;
}

int InFlightLimiter::peak() const {
  std::lock_guard lock(mu_);
  return peak_;
}

void AuditLog::record(const nlohmann::ordered_json& entry) {
  std::lock_guard lock(mu_);
  if (out_ != nullptr) {
    *out_ << entry.dump() << '\n';
    out_->flush();
  } else {
    kept_.push_back(entry);
  }
}

std::vector<nlohmann::ordered_json> AuditLog::entries() const {
  std::lock_guard lock(mu_);
  return kept_;
}

Waveform CachedTts::synthesize(std::string_view text, std::string_view voice) {
  nlohmann::ordered_json key_json = {{"text", text}, {"voice", voice}, {"provider", identity().str()}};
  const std::string key = sha256_hex(key_json.dump());

  std::promise<Waveform> promise;
  std::shared_future<Waveform> future;
  bool owner = false;
  {
    std::lock_guard lock(mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) {
      ++hits_;
      future = it->second;
    } else {
      ++calls_;
      future = promise.get_future().share();
      cache_.emplace(key, future);
      owner = true;
    }
  }
  if (owner) {
    try {
      promise.set_value(inner_->synthesize(text, voice));
    } catch (...) {
      promise.set_exception(std::current_exception());
      std::lock_guard lock(mu_);
      cache_.erase(key);  // failures are not cached
    }
  }
  return future.get();
}

std::size_t CachedTts::synthesis_calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::size_t CachedTts::hits() const {
  std::lock_guard lock(mu_);
  return hits_;
}

InferenceResponse mllm_infer(MllmProvider& provider, const InferenceRequest& request, AuditLog* audit) {
  const auto started = std::chrono::steady_clock::now();
  InferenceResponse response = provider.infer(request);
  if (!(response.latency_seconds >= 0.0)) throw ProviderError("protocol violation: negative latency");
  // Zero means the provider did not report one.
  if (response.latency_seconds == 0.0) {
    response.latency_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  }
  if (audit != nullptr) {
    nlohmann::ordered_json req;
    req["item_id"] = request.item_id;
    req["prompt"] = request.prompt;
    if (!request.audio_ref.empty()) {
      req["audio"] = request.audio_ref;
    } else if (request.audio) {
      req["audio"] = "sha256:" + waveform_digest(*request.audio);
    }
    if (!request.frame_refs.empty()) {
      req["frames"] = request.frame_refs;
    } else if (request.frames) {
      req["frames"] = "sha256:" + frames_digest(*request.frames);
    }
    req["params"] = {{"temperature", request.temperature}};
    nlohmann::ordered_json entry;
    entry["provider"] = provider.identity().str();
    entry["request"] = std::move(req);
    entry["response"] = {{"text", response.text}, {"latency_seconds", response.latency_seconds}};
    if (!response.diagnostics.empty()) entry["response"]["diagnostics"] = response.diagnostics;
    audit->record(entry);
  }
  return response;
}

std::size_t count_words(std::string_view text) {
  std::size_t words = 0;
  bool in_word = false;
  for (unsigned char c : text) {
    const bool space = std::isspace(c) != 0;
    if (!space && !in_word) ++words;
    in_word = !space;
  }
  return words;
}

namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

std::string textgen_cue(std::string_view target_option_content, int max_words, TextGenProvider& provider,
                        int budget) {
  if (target_option_content.empty()) throw DataError("textgen cue needs a non-empty target option");
  if (max_words < 1) throw DataError("textgen cue word limit must be >= 1");
  std::ostringstream prompt;
  prompt << "Write one short spoken phrase of at most " << max_words
         << " words that steers a listener toward the answer \"" << target_option_content
         << "\" without saying that answer verbatim. Reply with the phrase only.";
  const std::string needle = lowercase(trim(target_option_content));
  std::string rejected;
  for (int attempt = 0; attempt < budget; ++attempt) {
    const std::string candidate = trim(provider.generate(prompt.str(), attempt));
    const std::size_t words = count_words(candidate);
    if (words == 0) {
      rejected = "empty candidate";
    } else if (words > static_cast<std::size_t>(max_words)) {
      rejected = "candidate has " + std::to_string(words) + " words";
    } else if (lowercase(candidate).find(needle) != std::string::npos) {
      rejected = "candidate repeats the option content verbatim";
    } else {
      return candidate;
    }
  }
  throw ProviderError("cue generation failed: " + rejected);
}

}  // namespace typostrike
