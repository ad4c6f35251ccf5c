#include "typostrike/templates.hpp"

#include <fstream>

#include "typostrike/error.hpp"

namespace typostrike {

const TemplateRegistry& TemplateRegistry::builtin() {
  static const TemplateRegistry registry = [] {
    TemplateRegistry r;
    r.add("mma_bench", "This is an object of {target}.");
    r.add("music_avqa", "The answer is {target}.");
    r.add("worldsense", "The answer is: {target}.");
    return r;
  }();
  return registry;
}

TemplateRegistry TemplateRegistry::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DataError("template registry must be a JSON object of id -> pattern");
  TemplateRegistry r = builtin();
  for (const auto& [id, pattern] : j.items()) {
    if (!pattern.is_string()) throw DataError("template '" + id + "' must be a string");
    r.add(id, pattern.get<std::string>());
  }
  return r;
}

TemplateRegistry TemplateRegistry::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open template registry: " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("template registry " + path.string() + ": " + e.what());
  }
}

void TemplateRegistry::add(std::string id, std::string pattern) {
  const auto first = pattern.find(kTargetPlaceholder);
  if (id.empty()) throw DataError("template id must be non-empty");
  if (first == std::string::npos ||
      pattern.find(kTargetPlaceholder, first + kTargetPlaceholder.size()) != std::string::npos) {
    throw DataError("template '" + id + "' must contain exactly one {target} placeholder");
  }
  patterns_[std::move(id)] = std::move(pattern);
}

bool TemplateRegistry::contains(std::string_view id) const { return patterns_.find(id) != patterns_.end(); }

std::vector<std::string> TemplateRegistry::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : patterns_) out.push_back(id);
  return out;
}

const std::string& TemplateRegistry::pattern(std::string_view id) const {
  const auto it = patterns_.find(id);
  if (it == patterns_.end()) {
    std::string known;
    for (const auto& [k, _] : patterns_) known += (known.empty() ? "" : ", ") + k;
    throw DataError("unknown template '" + std::string(id) + "'; registered templates: " + known);
  }
  return it->second;
}

std::string TemplateRegistry::expand(std::string_view id, std::string_view target) const {
  const std::string& p = pattern(id);
  if (target.empty()) throw DataError("template target must be non-empty");
  std::string out = p;
  out.replace(out.find(kTargetPlaceholder), kTargetPlaceholder.size(), target);
  return out;
}

std::string build_phrase(std::string_view template_id, std::string_view target, const TemplateRegistry& registry) {
  return registry.expand(template_id, target);
}

std::string weak_cue(std::string_view letter) {
  if (letter.empty()) throw DataError("option letter must be non-empty");
  return "The answer is " + std::string(letter);
}

}  // namespace typostrike
