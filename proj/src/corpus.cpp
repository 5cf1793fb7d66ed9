#include "apidm/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include "apidm/error.hpp"
#include "apidm/rng.hpp"
#include "apidm/text.hpp"

namespace apidm {

std::string Signature::text() const {
    std::string out = return_type.empty() ? name : return_type + " " + name;
    out += "(";
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (i > 0) out += ", ";
        out += params[i].type;
        if (!params[i].name.empty()) out += " " + params[i].name;
    }
    out += ")";
    return out;
}

std::vector<std::string> ApiComponent::property_names() const {
    std::vector<std::string> names{"signature", "summary"};
    for (const auto& [name, text] : properties) names.push_back(name);
    return names;
}

std::optional<std::string> ApiComponent::property(std::string_view name) const {
    if (name == "signature") return signature.text();
    if (name == "summary") return summary;
    for (const auto& [key, text] : properties) {
        if (key == name) return text;
    }
    return std::nullopt;
}

double SparseVector::at(std::uint32_t term) const {
    auto it = std::lower_bound(index.begin(), index.end(), term);
    if (it == index.end() || *it != term) return 0.0;
    return value[static_cast<std::size_t>(it - index.begin())];
}

double SparseVector::dot(const SparseVector& other) const {
    double sum = 0.0;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < index.size() && j < other.index.size()) {
        if (index[i] == other.index[j]) {
            sum += value[i] * other.value[j];
            ++i;
            ++j;
        } else if (index[i] < other.index[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    return sum;
}

double SparseVector::norm() const {
    double sum = 0.0;
    for (double v : value) sum += v * v;
    return std::sqrt(sum);
}

std::vector<std::string> signature_tokens(const Signature& signature) {
    std::vector<std::string> tokens = tokenize(signature.return_type);
    auto append = [&tokens](std::string_view text) {
        auto more = tokenize(text);
        tokens.insert(tokens.end(), more.begin(), more.end());
    };
    append(signature.name);
    for (const auto& param : signature.params) {
        append(param.type);
        append(param.name);
    }
    return tokens;
}

namespace {

using TermCounts = std::map<std::uint32_t, double>;

SparseVector to_sparse(const TermCounts& weights) {
    SparseVector out;
    double norm_sq = 0.0;
    for (const auto& [term, w] : weights) norm_sq += w * w;
    if (norm_sq <= 0.0) return out;
    const double norm = std::sqrt(norm_sq);
    for (const auto& [term, w] : weights) {
        if (w <= 0.0) continue;
        out.index.push_back(term);
        out.value.push_back(w / norm);
    }
    return out;
}

void accumulate(TermCounts& into, const SparseVector& v, double scale) {
    for (std::size_t i = 0; i < v.nnz(); ++i) into[v.index[i]] += scale * v.value[i];
}

}  // namespace

ApiDataset ApiDataset::build(std::string api, std::vector<ApiComponent> components) {
    if (components.empty()) throw CorpusError("corpus has no components");
    ApiDataset dataset;
    dataset.api_ = std::move(api);
    for (std::size_t i = 0; i < components.size(); ++i) {
        const auto& c = components[i];
        if (c.id.empty()) throw CorpusError("component #" + std::to_string(i) + ": empty id");
        if (!dataset.by_id_.emplace(c.id, i).second) {
            throw CorpusError("component #" + std::to_string(i) + ": duplicate id '" + c.id + "'");
        }
        std::set<std::string> seen;
        bool any_property = false;
        for (const auto& [name, text] : c.properties) {
            if (name == "signature" || name == "summary" || !seen.insert(name).second) {
                throw CorpusError("component '" + c.id + "': duplicate property '" + name + "'");
            }
            any_property = any_property || !text.empty();
        }
        if (c.summary.empty() && !any_property) {
            throw CorpusError("component '" + c.id + "': summary is empty and no property has text");
        }
    }
    dataset.components_ = std::move(components);
    dataset.build_vectors();
    return dataset;
}

void ApiDataset::build_vectors() {
    const std::size_t n = components_.size();

    // Token lists per part: [0] signature, [1] summary, [2..] other properties.
    std::vector<std::vector<std::vector<std::string>>> parts(n);
    std::set<std::string> terms;
    for (std::size_t c = 0; c < n; ++c) {
        const auto& component = components_[c];
        parts[c].push_back(signature_tokens(component.signature));
        parts[c].push_back(tokenize(component.summary));
        for (const auto& [name, text] : component.properties) parts[c].push_back(tokenize(text));
        for (const auto& tokens : parts[c]) terms.insert(tokens.begin(), tokens.end());
    }

    vocabulary_.assign(terms.begin(), terms.end());
    term_lookup_.clear();
    for (std::uint32_t t = 0; t < vocabulary_.size(); ++t) term_lookup_.emplace(vocabulary_[t], t);

    term_sets_.assign(n, {});
    std::vector<std::size_t> df(vocabulary_.size(), 0);
    for (std::size_t c = 0; c < n; ++c) {
        auto& set = term_sets_[c];
        for (const auto& tokens : parts[c]) {
            for (const auto& token : tokens) set.push_back(term_lookup_.at(token));
        }
        std::sort(set.begin(), set.end());
        set.erase(std::unique(set.begin(), set.end()), set.end());
        for (std::uint32_t t : set) ++df[t];
    }

    idf_.resize(vocabulary_.size());
    for (std::size_t t = 0; t < vocabulary_.size(); ++t) {
        idf_[t] = std::log((1.0 + static_cast<double>(n)) / (1.0 + static_cast<double>(df[t]))) + 1.0;
    }

    vectors_.assign(n, {});
    warnings_.clear();
    for (std::size_t c = 0; c < n; ++c) {
        const SparseVector sig = tfidf(parts[c][0]);
        const SparseVector summary = tfidf(parts[c][1]);
        TermCounts mean;
        const std::size_t others = parts[c].size() - 2;
        if (others > 0) {
            TermCounts other_mean;
            for (std::size_t p = 2; p < parts[c].size(); ++p) {
                accumulate(other_mean, tfidf(parts[c][p]), 1.0 / static_cast<double>(others));
            }
            accumulate(mean, sig, 1.0 / 3.0);
            accumulate(mean, summary, 1.0 / 3.0);
            for (const auto& [term, w] : other_mean) mean[term] += w / 3.0;
        } else {
            accumulate(mean, sig, 0.5);
            accumulate(mean, summary, 0.5);
        }
        vectors_[c] = to_sparse(mean);
        if (vectors_[c].empty()) {
            warnings_.push_back("component '" + components_[c].id + "' has no searchable tokens");
        }
    }

    postings_.assign(vocabulary_.size(), {});
    for (std::uint32_t c = 0; c < n; ++c) {
        const auto& v = vectors_[c];
        for (std::size_t i = 0; i < v.nnz(); ++i) postings_[v.index[i]].emplace_back(c, v.value[i]);
    }
}

std::optional<std::size_t> ApiDataset::find(std::string_view id) const {
    auto it = by_id_.find(std::string(id));
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::uint32_t> ApiDataset::term_index(std::string_view term) const {
    auto it = term_lookup_.find(std::string(term));
    if (it == term_lookup_.end()) return std::nullopt;
    return it->second;
}

bool ApiDataset::contains_term(std::size_t index, std::uint32_t term) const {
    const auto& set = term_sets_.at(index);
    return std::binary_search(set.begin(), set.end(), term);
}

SparseVector ApiDataset::tfidf(std::span<const std::string> tokens) const {
    TermCounts weights;
    for (const auto& token : tokens) {
        auto it = term_lookup_.find(token);
        if (it != term_lookup_.end()) weights[it->second] += 1.0;
    }
    for (auto& [term, w] : weights) w *= idf_[term];
    return to_sparse(weights);
}

namespace {

template <class Json>
std::string require_string(const Json& obj, const char* field, const std::string& where) {
    if (!obj.contains(field)) throw CorpusError(where + ": missing field '" + field + "'");
    const auto& value = obj.at(field);
    if (!value.is_string()) throw CorpusError(where + ": field '" + field + "' must be a string");
    return value.template get<std::string>();
}

template <class Json>
std::string optional_string(const Json& obj, const char* field, const std::string& where) {
    if (!obj.contains(field) || obj.at(field).is_null()) return {};
    return require_string(obj, field, where);
}

}  // namespace

ApiDataset parse_dataset(const nlohmann::ordered_json& document) {
    if (!document.is_object()) throw CorpusError("corpus: top level must be an object");
    const std::string api = optional_string(document, "api", "corpus");
    if (!document.contains("components") || !document.at("components").is_array()) {
        throw CorpusError("corpus: 'components' must be an array");
    }
    std::vector<ApiComponent> components;
    std::size_t position = 0;
    for (const auto& entry : document.at("components")) {
        std::string where = "component #" + std::to_string(position++);
        if (!entry.is_object()) throw CorpusError(where + ": must be an object");
        ApiComponent c;
        c.id = require_string(entry, "id", where);
        where = "component '" + c.id + "'";
        if (entry.contains("signature") && !entry.at("signature").is_null()) {
            const auto& sig = entry.at("signature");
            if (!sig.is_object()) throw CorpusError(where + ": field 'signature' must be an object");
            c.signature.name = optional_string(sig, "name", where + ".signature");
            c.signature.return_type = optional_string(sig, "return_type", where + ".signature");
            if (sig.contains("params")) {
                if (!sig.at("params").is_array()) {
                    throw CorpusError(where + ": field 'signature.params' must be an array");
                }
                for (const auto& p : sig.at("params")) {
                    if (!p.is_object()) throw CorpusError(where + ": each parameter must be an object");
                    c.signature.params.push_back({optional_string(p, "name", where + ".params"),
                                                  optional_string(p, "type", where + ".params")});
                }
            }
        }
        c.summary = optional_string(entry, "summary", where);
        if (entry.contains("properties") && !entry.at("properties").is_null()) {
            const auto& props = entry.at("properties");
            if (!props.is_object()) throw CorpusError(where + ": field 'properties' must be an object");
            for (const auto& [name, text] : props.items()) {
                if (!text.is_string()) {
                    throw CorpusError(where + ": property '" + name + "' must be a string");
                }
                c.properties.emplace_back(name, text.template get<std::string>());
            }
        }
        components.push_back(std::move(c));
    }
    return ApiDataset::build(api, std::move(components));
}

ApiDataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw CorpusError("cannot open corpus file " + path.string());
    nlohmann::ordered_json document;
    try {
        document = nlohmann::ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw CorpusError(path.string() + ": " + e.what());
    }
    return parse_dataset(document);
}

nlohmann::ordered_json dataset_to_json(const ApiDataset& dataset) {
    nlohmann::ordered_json out;
    out["api"] = dataset.api();
    auto& list = out["components"] = nlohmann::ordered_json::array();
    for (const auto& c : dataset.components()) {
        nlohmann::ordered_json entry;
        entry["id"] = c.id;
        entry["signature"]["name"] = c.signature.name;
        entry["signature"]["return_type"] = c.signature.return_type;
        entry["signature"]["params"] = nlohmann::ordered_json::array();
        for (const auto& p : c.signature.params) {
            entry["signature"]["params"].push_back({{"name", p.name}, {"type", p.type}});
        }
        entry["summary"] = c.summary;
        entry["properties"] = nlohmann::ordered_json::object();
        for (const auto& [name, text] : c.properties) entry["properties"][name] = text;
        list.push_back(std::move(entry));
    }
    return out;
}

std::vector<double> RankedResults::top_scores(std::size_t count) const {
    std::vector<double> out;
    for (std::size_t i = 0; i < std::min(count, ranking_.size()); ++i) out.push_back(scores_[ranking_[i]]);
    return out;
}

std::size_t RankedResults::positive_count() const {
    return static_cast<std::size_t>(
        std::count_if(scores_.begin(), scores_.end(), [](double s) { return s > 0.0; }));
}

std::size_t RankedResults::rank_of(std::size_t component) const {
    auto it = std::find(ranking_.begin(), ranking_.end(), static_cast<std::uint32_t>(component));
    if (it == ranking_.end()) throw ContractError("component not in ranking");
    return static_cast<std::size_t>(it - ranking_.begin()) + 1;
}

std::vector<std::uint32_t> RankedResults::window(std::size_t n) const {
    const std::size_t end = std::min(cursor_ + n, ranking_.size());
    if (cursor_ >= end) return {};
    return {ranking_.begin() + static_cast<std::ptrdiff_t>(cursor_),
            ranking_.begin() + static_cast<std::ptrdiff_t>(end)};
}

std::vector<std::uint32_t> RankedResults::page(std::size_t n) {
    auto items = window(n);
    advance(n);
    return items;
}

std::uint32_t RankedResults::next_suggestion() {
    if (cursor_ >= ranking_.size()) throw ExhaustedResults("no further results to suggest");
    return ranking_[cursor_++];
}

void RankedResults::advance(std::size_t n) { cursor_ = std::min(cursor_ + n, ranking_.size()); }

RankedResults score_and_rank(const ApiDataset& dataset, const SearchCriteria& criteria,
                             std::uint64_t tie_seed) {
    for (const auto& kw : criteria.provided_keywords) {
        if (criteria.rejected_keywords.contains(kw)) {
            throw ContractError("keyword '" + kw + "' is both provided and rejected");
        }
    }

    const std::size_t n = dataset.size();
    std::vector<double> scores(n, 1.0);
    if (criteria.query) {
        std::fill(scores.begin(), scores.end(), 0.0);
        const auto tokens = tokenize(*criteria.query);
        const SparseVector q = dataset.tfidf(tokens);
        for (std::size_t i = 0; i < q.nnz(); ++i) {
            for (const auto& [component, weight] : dataset.postings(q.index[i])) {
                scores[component] += q.value[i] * weight;
            }
        }
        for (double& s : scores) s = std::clamp(s, 0.0, 1.0);
    }

    for (const auto& keyword : criteria.provided_keywords) {
        std::vector<std::uint32_t> required;
        bool known = true;
        for (const auto& token : tokenize(keyword)) {
            auto term = dataset.term_index(token);
            if (!term) {
                known = false;
                break;
            }
            required.push_back(*term);
        }
        for (std::size_t c = 0; c < n; ++c) {
            if (scores[c] == 0.0) continue;
            bool keep = known;
            for (std::uint32_t t : required) keep = keep && dataset.contains_term(c, t);
            if (!keep) scores[c] = 0.0;
        }
    }

    for (const auto& id : criteria.rejected_components) {
        auto index = dataset.find(id);
        if (!index) throw ContractError("rejected component '" + id + "' is not in the dataset");
        scores[*index] = 0.0;
    }

    std::vector<std::uint32_t> ranking(n);
    std::iota(ranking.begin(), ranking.end(), 0U);
    Rng rng(tie_seed);
    rng.shuffle(ranking);
    std::stable_sort(ranking.begin(), ranking.end(),
                     [&scores](std::uint32_t a, std::uint32_t b) { return scores[a] > scores[b]; });
    return RankedResults(std::move(scores), std::move(ranking));
}

std::vector<std::string> recommend_keywords(const ApiDataset& dataset, const RankedResults& results,
                                            const SearchCriteria& criteria, std::size_t k) {
    const std::size_t pool = std::min(kKeywordPoolSize, results.size());
    if (pool == 0 || k == 0) return {};
    std::vector<double> mean(dataset.vocabulary().size(), 0.0);
    for (std::size_t i = 0; i < pool; ++i) {
        const auto& v = dataset.search_vector(results.ranking()[i]);
        for (std::size_t j = 0; j < v.nnz(); ++j) mean[v.index[j]] += v.value[j];
    }
    for (double& m : mean) m /= static_cast<double>(pool);

    auto exclude = [&](std::string_view text) {
        for (const auto& token : tokenize(text)) {
            if (auto term = dataset.term_index(token)) mean[*term] = 0.0;
        }
    };
    if (criteria.query) exclude(*criteria.query);
    for (const auto& kw : criteria.provided_keywords) exclude(kw);
    for (const auto& kw : criteria.rejected_keywords) exclude(kw);

    std::vector<std::uint32_t> candidates;
    for (std::uint32_t t = 0; t < mean.size(); ++t) {
        if (mean[t] > 0.0) candidates.push_back(t);
    }
    const std::size_t take = std::min(k, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take),
                      candidates.end(), [&mean](std::uint32_t a, std::uint32_t b) {
                          return mean[a] != mean[b] ? mean[a] > mean[b] : a < b;
                      });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < take; ++i) out.push_back(dataset.vocabulary()[candidates[i]]);
    return out;
}

}  // namespace apidm
