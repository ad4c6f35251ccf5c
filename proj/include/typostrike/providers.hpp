#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"
#include "typostrike/audio.hpp"
#include "typostrike/error.hpp"
#include "typostrike/image.hpp"

namespace typostrike {

enum class ProviderKind { tts, asr, embedding, mllm, textgen };

std::string_view to_string(ProviderKind kind);
ProviderKind parse_provider_kind(std::string_view name);

// "mock:deterministic_tts" + "1" renders as "mock:deterministic_tts:1".
struct ProviderIdentity {
  std::string name;
  std::string version;

  std::string str() const { return name + ":" + version; }
  bool operator==(const ProviderIdentity&) const = default;
};

// Connection settings for one remote model service. The token is referenced
// by environment variable name only; the secret itself is read at request
// time and never stored or logged.
struct ProviderEndpoint {
  ProviderKind kind = ProviderKind::mllm;
  std::string base_url;
  std::string token_env;
  std::string model;
  double timeout_seconds = 60.0;
  int max_retries = 2;
  int max_in_flight = 4;

  void validate() const;
  nlohmann::ordered_json to_json() const;
  static ProviderEndpoint from_json(ProviderKind kind, const nlohmann::json& j);
  // TYPOSTRIKE_<KIND>_URL and TYPOSTRIKE_<KIND>_TOKEN_ENV; nullopt when the
  // URL variable is unset.
  static std::optional<ProviderEndpoint> from_env(ProviderKind kind);
};

// Retryable failure (connection refused, timeout, 429, 5xx).
class TransientError : public ProviderError {
 public:
  explicit TransientError(const std::string& what) : ProviderError(what) {}
};

struct RetryPolicy {
  int max_retries = 2;
  std::chrono::milliseconds base_delay{250};
  std::chrono::milliseconds max_delay{8000};
  double jitter = 0.5;  // delay is scaled by a uniform factor in [1, 1 + jitter)
};

std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int retry_index);

// Calls fn until it succeeds, a non-transient error escapes, or
// max_retries + 1 attempts have failed. Exhaustion raises a ProviderError
// flagged as an outage carrying the last diagnostic.
template <typename F>
auto with_retries(const RetryPolicy& policy, std::string_view what, F&& fn) -> decltype(fn()) {
  std::string last;
  const int attempts = policy.max_retries + 1;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    try {
      return fn();
    } catch (const TransientError& e) {
      last = e.what();
      if (attempt < attempts) std::this_thread::sleep_for(backoff_delay(policy, attempt - 1));
    }
  }
  throw ProviderError(std::string(what) + ": gave up after " + std::to_string(attempts) + " attempts: " + last,
                      attempts, /*outage=*/true);
}

// Caps concurrent requests against one endpoint. Waiters are admitted in
// arrival order.
class InFlightLimiter {
 public:
  explicit InFlightLimiter(int capacity);

  class Permit {
   public:
    explicit Permit(InFlightLimiter* owner) : owner_(owner) {}
    Permit(Permit&& other) noexcept : owner_(std::exchange(other.owner_, nullptr)) {}
    Permit& operator=(Permit&&) = delete;
    ~Permit();

   private:
    InFlightLimiter* owner_;
  };

  Permit acquire();
  int in_flight() const;
  int peak() const;

 private:
  void release();

  const int capacity_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::uint64_t next_ticket_ = 0;
  std::uint64_t serving_ = 0;
  int in_flight_ = 0;
  int peak_ = 0;
};

// Thread-safe JSONL audit sink. Without a stream, entries are kept in memory.
class AuditLog {
 public:
  AuditLog() = default;
  explicit AuditLog(std::ostream* out) : out_(out) {}

  void record(const nlohmann::ordered_json& entry);
  std::vector<nlohmann::ordered_json> entries() const;

 private:
  std::ostream* out_ = nullptr;
  mutable std::mutex mu_;
  std::vector<nlohmann::ordered_json> kept_;
};

class TtsProvider {
 public:
  virtual ~TtsProvider() = default;
  virtual ProviderIdentity identity() const = 0;
  virtual Waveform synthesize(std::string_view text, std::string_view voice) = 0;
};

class AsrProvider {
 public:
  virtual ~AsrProvider() = default;
  virtual ProviderIdentity identity() const = 0;
  virtual std::string transcribe(const Waveform& audio) = 0;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual ProviderIdentity identity() const = 0;
  virtual std::vector<double> embed(const Waveform& window) = 0;
};

struct InferenceRequest {
  std::string item_id;  // correlation id, also lets mocks look up ground truth
  std::string prompt;
  std::shared_ptr<const Waveform> audio;
  std::string audio_ref;  // file path sent instead of inline audio when set
  std::shared_ptr<const FrameSet> frames;
  std::vector<std::string> frame_refs;
  double temperature = 0.0;
};

struct InferenceResponse {
  std::string text;
  double latency_seconds = 0.0;
  std::vector<std::string> diagnostics;
};

class MllmProvider {
 public:
  virtual ~MllmProvider() = default;
  virtual ProviderIdentity identity() const = 0;
  virtual InferenceResponse infer(const InferenceRequest& request) = 0;
  // Mocks that only listen to audio skip frame loading.
  virtual bool consumes_frames() const { return true; }
};

class TextGenProvider {
 public:
  virtual ~TextGenProvider() = default;
  virtual ProviderIdentity identity() const = 0;
  // `attempt` starts at 0 and increases on each regeneration.
  virtual std::string generate(std::string_view prompt, int attempt) = 0;
};

// Content-addressed TTS cache keyed by (text, voice, provider identity).
// Concurrent identical requests share one synthesis.
class CachedTts : public TtsProvider {
 public:
  explicit CachedTts(std::shared_ptr<TtsProvider> inner) : inner_(std::move(inner)) {}

  ProviderIdentity identity() const override { return inner_->identity(); }
  Waveform synthesize(std::string_view text, std::string_view voice) override;

  std::size_t synthesis_calls() const;
  std::size_t hits() const;

 private:
  std::shared_ptr<TtsProvider> inner_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_future<Waveform>> cache_;
  std::size_t calls_ = 0;
  std::size_t hits_ = 0;
};

// One logged inference call. Rejects responses that break the protocol
// (negative latency) and records request/response in the audit log.
InferenceResponse mllm_infer(MllmProvider& provider, const InferenceRequest& request, AuditLog* audit = nullptr);

std::size_t count_words(std::string_view text);

// Asks for a steering phrase toward `target_option_content` and accepts the
// first candidate with at most `max_words` words that does not contain the
// option content verbatim (case-insensitive). Regenerates up to `budget`
// times in total.
std::string textgen_cue(std::string_view target_option_content, int max_words, TextGenProvider& provider,
                        int budget = 3);

}  // namespace typostrike
