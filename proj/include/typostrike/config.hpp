#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "json.hpp"
#include "typostrike/experiment.hpp"
#include "typostrike/providers.hpp"
#include "typostrike/stealth_config.hpp"
#include "typostrike/templates.hpp"

namespace typostrike {

// Run configuration file (JSON):
//   {
//     "seed": 0, "parallelism": 4,
//     "endpoints": {"mllm": {"base_url": ..., "token_env": ..., "model": ...,
//                            "timeout_seconds": 60, "max_retries": 2, "max_in_flight": 4}, ...},
//     "stealth": {"epsilon": 1e-8, "frame_length": 1024, "hop_length": 512, "window": "hann",
//                 "embedding_window_seconds": 1.0, "embedding_hop_seconds": 0.5},
//     "grids": {"volume": [0.5, 1, 2], "voice": ["female", "male"]},
//     "templates": {"my_dataset": "The answer is {target}."}
//   }
// Every key is optional. Command-line flags override the file; the
// TYPOSTRIKE_<KIND>_URL / _TOKEN_ENV variables only supply endpoints the
// file leaves out.
struct RunConfig {
  std::uint64_t seed = 0;
  int parallelism = 1;
  std::map<ProviderKind, ProviderEndpoint> endpoints;
  StealthConfig stealth;
  std::map<SweepAxis, SweepGrid> grids;
  TemplateRegistry templates = TemplateRegistry::builtin();
  nlohmann::ordered_json source = nlohmann::ordered_json::object();

  static RunConfig from_json(const nlohmann::ordered_json& j);
  static RunConfig load(const std::filesystem::path& path);

  // Adds endpoints from the environment for kinds the file leaves out.
  void fill_endpoints_from_env();
  SweepGrid grid(SweepAxis axis) const;
  // SHA-256 of the canonical dump of the source document.
  std::string digest() const;
};

// HTTP clients for every configured endpoint. TTS goes through CachedTts.
ExperimentProviders http_providers(const RunConfig& config);

}  // namespace typostrike
