#include "apidm/text.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

namespace apidm {
namespace {

bool is_upper(char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; }
bool is_lower(char c) { return std::islower(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
bool is_alnum(char c) {
    return static_cast<unsigned char>(c) < 0x80 && std::isalnum(static_cast<unsigned char>(c)) != 0;
}

void split_identifier(std::string_view word, std::vector<std::string>& out) {
    std::size_t start = 0;
    for (std::size_t i = 1; i < word.size(); ++i) {
        const char prev = word[i - 1];
        const char cur = word[i];
        const bool lower_to_upper = (is_lower(prev) || is_digit(prev)) && is_upper(cur);
        const bool acronym_end =
            is_upper(prev) && is_upper(cur) && i + 1 < word.size() && is_lower(word[i + 1]);
        if (lower_to_upper || acronym_end) {
            out.emplace_back(word.substr(start, i - start));
            start = i;
        }
    }
    out.emplace_back(word.substr(start));
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && !is_alnum(text[i])) ++i;
        const std::size_t start = i;
        while (i < text.size() && is_alnum(text[i])) ++i;
        if (i > start) split_identifier(text.substr(start, i - start), tokens);
    }
    for (auto& token : tokens) {
        std::transform(token.begin(), token.end(), token.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    }
    std::erase_if(tokens, [](const std::string& t) { return t.empty(); });
    return tokens;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
    std::vector<std::size_t> row(b.size() + 1);
    std::iota(row.begin(), row.end(), std::size_t{0});
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diagonal = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t above = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, diagonal + (a[i - 1] == b[j - 1] ? 0 : 1)});
            diagonal = above;
        }
    }
    return row[b.size()];
}

}  // namespace apidm
