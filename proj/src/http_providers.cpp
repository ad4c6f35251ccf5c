#include "typostrike/http_providers.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cstdlib>
#include <regex>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"
#include "typostrike/wav_io.hpp"

namespace typostrike {

namespace {

std::string require_string(const nlohmann::json& j, const char* field, const std::string& what) {
  if (!j.is_object() || !j.contains(field) || !j[field].is_string()) {
    throw ProviderError(what + ": protocol violation (missing string field '" + field + "')");
  }
  return j[field].get<std::string>();
}

std::string wav_body(const Waveform& w) {
  const auto bytes = encode_wav(w);
  return std::string(bytes.begin(), bytes.end());
}

ProviderIdentity identity_of(const HttpTransport& t) {
  const auto& ep = t.endpoint();
  return {"http:" + std::string(to_string(ep.kind)), ep.model.empty() ? std::string("unversioned") : ep.model};
}

}  // namespace

ParsedUrl parse_base_url(const std::string& url) {
  static const std::regex re(R"(^(https?)://([^/:]+)(?::(\d+))?(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) throw DataError("invalid endpoint address '" + url + "'");
  ParsedUrl out;
  out.scheme = m[1];
  out.host = m[2];
  out.port = m[3].matched ? std::stoi(m[3]) : (out.scheme == "https" ? 443 : 80);
  out.path = m[4].matched ? std::string(m[4]) : std::string{};
  while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
  return out;
}

HttpTransport::HttpTransport(ProviderEndpoint endpoint)
    : HttpTransport(endpoint, RetryPolicy{.max_retries = endpoint.max_retries}) {}

HttpTransport::HttpTransport(ProviderEndpoint endpoint, RetryPolicy policy)
    : endpoint_(std::move(endpoint)), policy_(policy), limiter_(endpoint_.max_in_flight) {
  endpoint_.validate();
  url_ = parse_base_url(endpoint_.base_url);
}

std::string HttpTransport::post_once(const std::string& route, const std::string& body,
                                     const std::string& content_type) {
  const std::string origin = url_.scheme + "://" + url_.host + ":" + std::to_string(url_.port);
  httplib::Client client(origin);
  const auto timeout = std::chrono::duration<double>(endpoint_.timeout_seconds);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));

  httplib::Headers headers;
  if (!endpoint_.token_env.empty()) {
    const char* token = std::getenv(endpoint_.token_env.c_str());
    if (token == nullptr) throw ProviderError("token variable " + endpoint_.token_env + " is not set");
    headers.emplace("Authorization", std::string("Bearer ") + token);
  }

  auto result = client.Post(url_.path + route, headers, body, content_type);
  if (!result) {
    throw TransientError(std::string(to_string(endpoint_.kind)) + " " + route + ": " + httplib::to_string(result.error()));
  }
  const int status = result->status;
  if (status == 429 || status >= 500) {
    throw TransientError(std::string(to_string(endpoint_.kind)) + " " + route + ": HTTP " + std::to_string(status));
  }
  if (status < 200 || status >= 300) {
    throw ProviderError(std::string(to_string(endpoint_.kind)) + " " + route + ": HTTP " + std::to_string(status));
  }
  return result->body;
}

std::string HttpTransport::post(const std::string& route, const std::string& body, const std::string& content_type) {
  auto permit = limiter_.acquire();
  return with_retries(policy_, std::string(to_string(endpoint_.kind)) + " " + route,
                      [&] { return post_once(route, body, content_type); });
}

nlohmann::json HttpTransport::post_json(const std::string& route, const nlohmann::json& body) {
  return post_bytes_for_json(route, body.dump(), "application/json");
}

nlohmann::json HttpTransport::post_bytes_for_json(const std::string& route, const std::string& bytes,
                                                  const std::string& content_type) {
  const std::string raw = post(route, bytes, content_type);
  auto parsed = nlohmann::json::parse(raw, nullptr, /*allow_exceptions=*/false);
  if (parsed.is_discarded()) {
    throw ProviderError(std::string(to_string(endpoint_.kind)) + " " + route + ": protocol violation (body is not JSON)");
  }
  return parsed;
}

ProviderIdentity HttpTts::identity() const { return identity_of(*transport_); }

Waveform HttpTts::synthesize(std::string_view text, std::string_view voice) {
  nlohmann::json body = {{"text", text}, {"voice", voice}, {"model", transport_->endpoint().model}};
  const std::string raw = transport_->post("/tts", body.dump(), "application/json");
  try {
    return decode_wav(std::span(reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size()));
  } catch (const DataError& e) {
    throw ProviderError(std::string("tts: protocol violation (") + e.what() + ")");
  }
}

ProviderIdentity HttpAsr::identity() const { return identity_of(*transport_); }

std::string HttpAsr::transcribe(const Waveform& audio) {
  return require_string(transport_->post_bytes_for_json("/asr", wav_body(audio), "audio/wav"), "transcript", "asr");
}

ProviderIdentity HttpEmbedder::identity() const { return identity_of(*transport_); }

std::vector<double> HttpEmbedder::embed(const Waveform& window) {
  const auto j = transport_->post_bytes_for_json("/embed", wav_body(window), "audio/wav");
  if (!j.is_object() || !j.contains("vector") || !j["vector"].is_array() || j["vector"].empty()) {
    throw ProviderError("embedding: protocol violation (missing vector)");
  }
  std::vector<double> out;
  for (const auto& v : j["vector"]) {
    if (!v.is_number()) throw ProviderError("embedding: protocol violation (non-numeric component)");
    out.push_back(v.get<double>());
  }
  return out;
}

ProviderIdentity HttpMllm::identity() const { return identity_of(*transport_); }

nlohmann::json HttpMllm::wire_request(const InferenceRequest& request, const std::string& model) {
  nlohmann::json j;
  j["model"] = model;
  j["prompt"] = request.prompt;
  j["params"] = {{"temperature", request.temperature}};
  nlohmann::json frames = nlohmann::json::array();
  if (!request.frame_refs.empty()) {
    for (const auto& ref : request.frame_refs) frames.push_back(ref);
  } else if (request.frames) {
    for (const auto& img : request.frames->frames) frames.push_back(base64_encode(encode_png(img)));
  }
  j["frames"] = std::move(frames);
  if (!request.audio_ref.empty()) {
    j["audio"] = request.audio_ref;
  } else if (request.audio) {
    j["audio"] = base64_encode(encode_wav(*request.audio));
  } else {
    j["audio"] = nullptr;
  }
  return j;
}

InferenceResponse HttpMllm::infer(const InferenceRequest& request) {
  const auto started = std::chrono::steady_clock::now();
  const auto j = transport_->post_json("/infer", wire_request(request, transport_->endpoint().model));
  InferenceResponse r;
  r.text = require_string(j, "text", "mllm");
  r.latency_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return r;
}

ProviderIdentity HttpTextGen::identity() const { return identity_of(*transport_); }

std::string HttpTextGen::generate(std::string_view prompt, int attempt) {
  nlohmann::json body = {{"model", transport_->endpoint().model},
                         {"prompt", prompt},
                         {"attempt", attempt},
                         {"params", {{"temperature", 0.0}}}};
  return require_string(transport_->post_json("/generate", body), "text", "textgen");
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

}  // namespace typostrike
