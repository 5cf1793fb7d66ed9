#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace apidm {

/// Lowercased terms. Splits on non-alphanumerics, then splits identifiers on
/// camelCase boundaries ("openSSLContext" -> open, ssl, context).
std::vector<std::string> tokenize(std::string_view text);

/// Levenshtein distance, used for "did you mean" suggestions.
std::size_t edit_distance(std::string_view a, std::string_view b);

}  // namespace apidm
