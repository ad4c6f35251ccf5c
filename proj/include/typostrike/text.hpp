#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace typostrike {

// Lowercase; apostrophes dropped, other ASCII punctuation treated as a word
// break; whitespace collapsed and trimmed. Idempotent.
std::string normalize_label(std::string_view text);

// Words of normalize_label(text).
std::vector<std::string> split_words(std::string_view text);

bool same_label(std::string_view a, std::string_view b);

// End position (exclusive word index) of the last occurrence of `needle` as
// a contiguous word run inside `haystack`; nullopt when absent or when the
// needle is empty.
std::optional<std::size_t> last_word_run(const std::vector<std::string>& haystack,
                                         const std::vector<std::string>& needle);

}  // namespace typostrike
