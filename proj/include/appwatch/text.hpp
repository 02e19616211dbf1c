#pragma once

#include <string>
#include <string_view>

namespace appwatch::text {

/// Trim and collapse every run of ASCII whitespace to a single space.
std::string collapse_whitespace(std::string_view s);

/// Keyword identity: ASCII case-fold, trim, collapse whitespace.
std::string normalize_keyword(std::string_view s);

/// Review text identity: trim and collapse whitespace; case is preserved.
std::string normalize_review(std::string_view s);

/// Number of maximal non-whitespace runs.
std::size_t word_count(std::string_view s);

}  // namespace appwatch::text
