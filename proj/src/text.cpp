#include "typostrike/text.hpp"

#include <cctype>

namespace typostrike {

std::string normalize_label(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (unsigned char c : text) {
    if (c == '\'') continue;
    if (std::isspace(c) || std::ispunct(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  const std::string norm = normalize_label(text);
  std::size_t start = 0;
  while (start < norm.size()) {
    std::size_t end = norm.find(' ', start);
    if (end == std::string::npos) end = norm.size();
    words.push_back(norm.substr(start, end - start));
    start = end + 1;
  }
  return words;
}

bool same_label(std::string_view a, std::string_view b) { return normalize_label(a) == normalize_label(b); }

std::optional<std::size_t> last_word_run(const std::vector<std::string>& haystack,
                                         const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > haystack.size()) return std::nullopt;
  for (std::size_t end = haystack.size(); end >= needle.size(); --end) {
    const std::size_t start = end - needle.size();
    bool hit = true;
    for (std::size_t k = 0; k < needle.size() && hit; ++k) hit = haystack[start + k] == needle[k];
    if (hit) return end;
  }
  return std::nullopt;
}

}  // namespace typostrike
