#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace apidm {

/// Corpus file does not match the schema, or violates a dataset invariant.
class CorpusError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition (wrong actor, bad payload, ...).
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The result cursor has reached the end of the ranking.
class ExhaustedResults : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Lookup of an unknown component; carries the closest known ids.
class NotFound : public std::runtime_error {
public:
    NotFound(const std::string& what, std::vector<std::string> suggestions)
        : std::runtime_error(what), suggestions_(std::move(suggestions)) {}
    const std::vector<std::string>& suggestions() const noexcept { return suggestions_; }

private:
    std::vector<std::string> suggestions_;
};

}  // namespace apidm
