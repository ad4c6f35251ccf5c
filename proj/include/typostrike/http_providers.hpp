#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>

#include "json.hpp"
#include "typostrike/providers.hpp"

namespace typostrike {

struct ParsedUrl {
  std::string scheme;  // http or https
  std::string host;
  int port = 80;
  std::string path;  // prefix without trailing slash, may be empty
};

ParsedUrl parse_base_url(const std::string& url);

// One JSON-over-HTTP endpoint: bearer auth from the configured environment
// variable, in-flight cap, bounded jittered retries. Connection failures,
// timeouts, 429 and 5xx are retried; other 4xx fail immediately; a body that
// does not parse as the expected JSON is a "protocol violation".
class HttpTransport {
 public:
  explicit HttpTransport(ProviderEndpoint endpoint);
  HttpTransport(ProviderEndpoint endpoint, RetryPolicy policy);

  const ProviderEndpoint& endpoint() const { return endpoint_; }
  const InFlightLimiter& limiter() const { return limiter_; }

  // POSTs `body` to base path + route and returns the raw response body.
  std::string post(const std::string& route, const std::string& body, const std::string& content_type);
  nlohmann::json post_json(const std::string& route, const nlohmann::json& body);
  nlohmann::json post_bytes_for_json(const std::string& route, const std::string& bytes,
                                     const std::string& content_type);

 private:
  std::string post_once(const std::string& route, const std::string& body, const std::string& content_type);

  ProviderEndpoint endpoint_;
  ParsedUrl url_;
  RetryPolicy policy_;
  InFlightLimiter limiter_;
};

// POST /tts {text, voice, model} -> WAV bytes.
class HttpTts : public TtsProvider {
 public:
  explicit HttpTts(std::shared_ptr<HttpTransport> transport) : transport_(std::move(transport)) {}
  ProviderIdentity identity() const override;
  Waveform synthesize(std::string_view text, std::string_view voice) override;

 private:
  std::shared_ptr<HttpTransport> transport_;
};

// POST /asr WAV bytes -> {transcript}.
class HttpAsr : public AsrProvider {
 public:
  explicit HttpAsr(std::shared_ptr<HttpTransport> transport) : transport_(std::move(transport)) {}
  ProviderIdentity identity() const override;
  std::string transcribe(const Waveform& audio) override;

 private:
  std::shared_ptr<HttpTransport> transport_;
};

// POST /embed WAV bytes -> {vector: [d floats]}.
class HttpEmbedder : public EmbeddingProvider {
 public:
  explicit HttpEmbedder(std::shared_ptr<HttpTransport> transport) : transport_(std::move(transport)) {}
  ProviderIdentity identity() const override;
  std::vector<double> embed(const Waveform& window) override;

 private:
  std::shared_ptr<HttpTransport> transport_;
};

// POST /infer {frames, audio, prompt, params: {temperature}} -> {text}.
// Media goes as file references when the request has them, otherwise
// inline as base64 (WAV for audio, PNG for frames).
class HttpMllm : public MllmProvider {
 public:
  explicit HttpMllm(std::shared_ptr<HttpTransport> transport) : transport_(std::move(transport)) {}
  ProviderIdentity identity() const override;
  InferenceResponse infer(const InferenceRequest& request) override;

  static nlohmann::json wire_request(const InferenceRequest& request, const std::string& model);

 private:
  std::shared_ptr<HttpTransport> transport_;
};

// POST /generate {prompt, attempt, params: {temperature}} -> {text}.
class HttpTextGen : public TextGenProvider {
 public:
  explicit HttpTextGen(std::shared_ptr<HttpTransport> transport) : transport_(std::move(transport)) {}
  ProviderIdentity identity() const override;
  std::string generate(std::string_view prompt, int attempt) override;

 private:
  std::shared_ptr<HttpTransport> transport_;
};

std::string base64_encode(std::span<const std::uint8_t> bytes);

}  // namespace typostrike
