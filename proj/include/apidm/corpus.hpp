#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace apidm {

struct Parameter {
    std::string name;
    std::string type;
};

struct Signature {
    std::string name;
    std::string return_type;
    std::vector<Parameter> params;

    /// C-style rendering: "int ssh_connect(ssh_session session)".
    std::string text() const;
    bool empty() const { return name.empty() && return_type.empty() && params.empty(); }
};

/// One documented API function.
struct ApiComponent {
    std::string id;
    Signature signature;
    std::string summary;
    /// Other documented properties in file order (description, params, returns, ...).
    std::vector<std::pair<std::string, std::string>> properties;

    /// "signature", "summary", then the other property names.
    std::vector<std::string> property_names() const;
    std::optional<std::string> property(std::string_view name) const;
    std::size_t property_count() const { return 2 + properties.size(); }
};

/// Sorted-index sparse vector.
struct SparseVector {
    std::vector<std::uint32_t> index;
    std::vector<double> value;

    std::size_t nnz() const { return index.size(); }
    bool empty() const { return index.empty(); }
    double at(std::uint32_t term) const;
    double dot(const SparseVector& other) const;
    double norm() const;
};

/// Searchable knowledge: components plus their weighted TF-IDF search vectors.
/// Immutable once built; share freely between sessions.
class ApiDataset {
public:
    /// Validates the components and builds vocabulary, idf and search vectors.
    static ApiDataset build(std::string api, std::vector<ApiComponent> components);

    const std::string& api() const { return api_; }
    std::size_t size() const { return components_.size(); }
    std::span<const ApiComponent> components() const { return components_; }
    const ApiComponent& component(std::size_t index) const { return components_.at(index); }
    const std::string& id(std::size_t index) const { return components_.at(index).id; }
    std::optional<std::size_t> find(std::string_view id) const;

    /// Terms in lexicographic order; a term's position is its index.
    const std::vector<std::string>& vocabulary() const { return vocabulary_; }
    std::optional<std::uint32_t> term_index(std::string_view term) const;
    std::span<const double> idf() const { return idf_; }

    const SparseVector& search_vector(std::size_t index) const { return vectors_.at(index); }
    /// Sorted, de-duplicated term indices of everything documented for a component.
    const std::vector<std::uint32_t>& term_set(std::size_t index) const { return term_sets_.at(index); }
    bool contains_term(std::size_t index, std::uint32_t term) const;

    /// L2-normalized TF-IDF vector of a token list; unknown tokens are ignored.
    SparseVector tfidf(std::span<const std::string> tokens) const;

    /// Inverted index: term -> (component, weight) in component order.
    const std::vector<std::pair<std::uint32_t, double>>& postings(std::uint32_t term) const {
        return postings_.at(term);
    }

    /// Non-fatal issues found while building (e.g. components with no tokens).
    const std::vector<std::string>& warnings() const { return warnings_; }

private:
    ApiDataset() = default;
    void build_vectors();

    std::string api_;
    std::vector<ApiComponent> components_;
    std::unordered_map<std::string, std::size_t> by_id_;
    std::vector<std::string> vocabulary_;
    std::unordered_map<std::string, std::uint32_t> term_lookup_;
    std::vector<double> idf_;
    std::vector<SparseVector> vectors_;
    std::vector<std::vector<std::uint32_t>> term_sets_;
    std::vector<std::vector<std::pair<std::uint32_t, double>>> postings_;
    std::vector<std::string> warnings_;
};

/// Tokens of the signature: name, return type, parameter names and types.
std::vector<std::string> signature_tokens(const Signature& signature);

ApiDataset parse_dataset(const nlohmann::ordered_json& document);
ApiDataset load_dataset(const std::filesystem::path& path);
nlohmann::ordered_json dataset_to_json(const ApiDataset& dataset);

struct SearchCriteria {
    std::optional<std::string> query;
    std::set<std::string> provided_keywords;
    std::set<std::string> rejected_keywords;
    std::set<std::string> rejected_components;

    bool empty() const {
        return !query && provided_keywords.empty() && rejected_keywords.empty() &&
               rejected_components.empty();
    }
};

/// Scores and ranking for one search, plus the result cursor r.
class RankedResults {
public:
    RankedResults() = default;
    RankedResults(std::vector<double> scores, std::vector<std::uint32_t> ranking)
        : scores_(std::move(scores)), ranking_(std::move(ranking)) {}

    std::size_t size() const { return ranking_.size(); }
    const std::vector<double>& scores() const { return scores_; }
    /// Component indices, best first.
    const std::vector<std::uint32_t>& ranking() const { return ranking_; }
    std::size_t result_index() const { return cursor_; }

    double top_score() const { return ranking_.empty() ? 0.0 : scores_[ranking_.front()]; }
    /// Scores in rank order, truncated to `count`.
    std::vector<double> top_scores(std::size_t count) const;
    std::size_t positive_count() const;
    /// 1-based rank of a component.
    std::size_t rank_of(std::size_t component) const;

    /// ranking[r .. min(r+n, |D|)), then r advances by the same amount.
    std::vector<std::uint32_t> page(std::size_t n);
    /// ranking[r .. min(r+n, |D|)) without moving r.
    std::vector<std::uint32_t> window(std::size_t n) const;
    /// ranking[r], then r advances by one. Throws ExhaustedResults when r == |D|.
    std::uint32_t next_suggestion();

    void advance(std::size_t n);
    void reset_cursor() { cursor_ = 0; }
    bool exhausted() const { return cursor_ >= ranking_.size(); }

private:
    std::vector<double> scores_;
    std::vector<std::uint32_t> ranking_;
    std::size_t cursor_ = 0;
};

/// Cosine against the query (1.0 for every component when there is no query),
/// then provided keywords and rejected components zero out scores. Ties are
/// broken by a shuffle seeded with `tie_seed`. Throws ContractError for ids
/// outside the dataset or overlapping provided/rejected keywords.
RankedResults score_and_rank(const ApiDataset& dataset, const SearchCriteria& criteria,
                             std::uint64_t tie_seed);

/// Terms with the largest values in the mean vector of the 20 best-ranked
/// components, skipping anything in the query, provided or rejected keywords.
std::vector<std::string> recommend_keywords(const ApiDataset& dataset, const RankedResults& results,
                                            const SearchCriteria& criteria, std::size_t k);

inline constexpr std::size_t kKeywordPoolSize = 20;

}  // namespace apidm
