#include "typostrike/config.hpp"

#include <fstream>

#include "typostrike/digest.hpp"
#include "typostrike/http_providers.hpp"

namespace typostrike {

using ojson = nlohmann::ordered_json;

RunConfig RunConfig::from_json(const ojson& j) {
  if (!j.is_object()) throw DataError("config must be a JSON object");
  RunConfig c;
  c.source = j;
  try {
    c.seed = j.value("seed", c.seed);
    c.parallelism = j.value("parallelism", c.parallelism);
    if (c.parallelism < 1) throw DataError("config: parallelism must be >= 1");
    if (j.contains("endpoints")) {
      for (const auto& [kind, ep] : j.at("endpoints").items()) {
        const ProviderKind k = parse_provider_kind(kind);
        c.endpoints[k] = ProviderEndpoint::from_json(k, nlohmann::json(ep));
      }
    }
    if (j.contains("stealth")) {
      const auto& s = j.at("stealth");
      c.stealth.epsilon = s.value("epsilon", c.stealth.epsilon);
      c.stealth.frame_length = s.value("frame_length", c.stealth.frame_length);
      c.stealth.hop_length = s.value("hop_length", c.stealth.hop_length);
      if (s.contains("window")) c.stealth.window = parse_window(s.at("window").get<std::string>());
      c.stealth.embedding_window_seconds = s.value("embedding_window_seconds", c.stealth.embedding_window_seconds);
      c.stealth.embedding_hop_seconds = s.value("embedding_hop_seconds", c.stealth.embedding_hop_seconds);
      c.stealth.validate();
    }
    if (j.contains("grids")) {
      for (const auto& [axis, values] : j.at("grids").items()) {
        SweepGrid g{parse_sweep_axis(axis), {}};
        if (!values.is_array()) throw DataError("config: grid '" + axis + "' must be a list");
        for (const auto& v : values) g.values.push_back(v.is_string() ? v.get<std::string>() : v.dump());
        g.validate();
        c.grids[g.axis] = std::move(g);
      }
    }
    if (j.contains("templates")) c.templates = TemplateRegistry::from_json(nlohmann::json(j.at("templates")));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config " + path.string());
  try {
    return from_json(ojson::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void RunConfig::fill_endpoints_from_env() {
  for (auto k : {ProviderKind::tts, ProviderKind::asr, ProviderKind::embedding, ProviderKind::mllm,
                 ProviderKind::textgen}) {
    if (endpoints.contains(k)) continue;
    if (auto ep = ProviderEndpoint::from_env(k)) endpoints[k] = *ep;
  }
}

SweepGrid RunConfig::grid(SweepAxis axis) const {
  const auto it = grids.find(axis);
  return it != grids.end() ? it->second : SweepGrid::default_grid(axis);
}

std::string RunConfig::digest() const { return sha256_hex(source.dump()); }

ExperimentProviders http_providers(const RunConfig& config) {
  ExperimentProviders p;
  auto transport = [&](ProviderKind k) -> std::shared_ptr<HttpTransport> {
    const auto it = config.endpoints.find(k);
    if (it == config.endpoints.end()) return nullptr;
    return std::make_shared<HttpTransport>(it->second);
  };
  if (auto t = transport(ProviderKind::tts)) p.tts = std::make_shared<CachedTts>(std::make_shared<HttpTts>(t));
  if (auto t = transport(ProviderKind::asr)) p.asr = std::make_shared<HttpAsr>(t);
  if (auto t = transport(ProviderKind::embedding)) p.embedder = std::make_shared<HttpEmbedder>(t);
  if (auto t = transport(ProviderKind::mllm)) p.mllm = std::make_shared<HttpMllm>(t);
  if (auto t = transport(ProviderKind::textgen)) p.textgen = std::make_shared<HttpTextGen>(t);
  return p;
}

}  // namespace typostrike
