#pragma once

// Straightforward re-derivations used as test oracles: dense maps keyed by the
// term string, no inverted index, no shared code with the library beyond tokenize.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "apidm/corpus.hpp"
#include "apidm/text.hpp"

namespace oracle {

using Dense = std::map<std::string, double>;

inline std::vector<std::string> signature_terms(const apidm::Signature& s) {
    std::string text = s.return_type + " " + s.name;
    for (const auto& p : s.params) text += " " + p.type + " " + p.name;
    return apidm::tokenize(text);
}

inline Dense normalize(Dense v) {
    double sq = 0.0;
    for (const auto& [t, w] : v) sq += w * w;
    if (sq == 0.0) return {};
    for (auto& [t, w] : v) w /= std::sqrt(sq);
    return v;
}

struct Index {
    std::map<std::string, double> idf;
    std::vector<Dense> vectors;
    std::vector<std::set<std::string>> terms;
};

inline Index build(const std::vector<apidm::ApiComponent>& components) {
    Index ix;
    const double n = static_cast<double>(components.size());
    std::vector<std::vector<std::vector<std::string>>> parts;
    for (const auto& c : components) {
        std::vector<std::vector<std::string>> p;
        p.push_back(signature_terms(c.signature));
        p.push_back(apidm::tokenize(c.summary));
        for (const auto& [name, text] : c.properties) p.push_back(apidm::tokenize(text));
        std::set<std::string> all;
        for (const auto& tokens : p) all.insert(tokens.begin(), tokens.end());
        ix.terms.push_back(all);
        parts.push_back(p);
    }
    std::map<std::string, double> df;
    for (const auto& set : ix.terms) {
        for (const auto& t : set) df[t] += 1.0;
    }
    for (const auto& [t, d] : df) ix.idf[t] = std::log((1.0 + n) / (1.0 + d)) + 1.0;

    auto tfidf = [&](const std::vector<std::string>& tokens) {
        Dense v;
        for (const auto& t : tokens) v[t] += 1.0;
        for (auto& [t, w] : v) w *= ix.idf.at(t);
        return normalize(v);
    };
    for (const auto& p : parts) {
        const Dense a = tfidf(p[0]);
        const Dense b = tfidf(p[1]);
        Dense out;
        if (p.size() == 2) {
            for (const auto& [t, w] : a) out[t] += w / 2.0;
            for (const auto& [t, w] : b) out[t] += w / 2.0;
        } else {
            Dense c;
            for (std::size_t i = 2; i < p.size(); ++i) {
                for (const auto& [t, w] : tfidf(p[i])) c[t] += w / static_cast<double>(p.size() - 2);
            }
            for (const auto& [t, w] : a) out[t] += w / 3.0;
            for (const auto& [t, w] : b) out[t] += w / 3.0;
            for (const auto& [t, w] : c) out[t] += w / 3.0;
        }
        ix.vectors.push_back(normalize(out));
    }
    return ix;
}

inline Dense query_vector(const Index& ix, const std::string& query) {
    Dense v;
    for (const auto& t : apidm::tokenize(query)) {
        if (ix.idf.contains(t)) v[t] += 1.0;
    }
    for (auto& [t, w] : v) w *= ix.idf.at(t);
    return normalize(v);
}

inline double dot(const Dense& a, const Dense& b) {
    double s = 0.0;
    for (const auto& [t, w] : a) {
        auto it = b.find(t);
        if (it != b.end()) s += w * it->second;
    }
    return s;
}

inline std::vector<double> scores(const Index& ix, const std::vector<apidm::ApiComponent>& components,
                                  const apidm::SearchCriteria& criteria) {
    std::vector<double> out(components.size(), 1.0);
    if (criteria.query) {
        const Dense q = query_vector(ix, *criteria.query);
        for (std::size_t c = 0; c < components.size(); ++c) out[c] = dot(q, ix.vectors[c]);
    }
    for (std::size_t c = 0; c < components.size(); ++c) {
        for (const auto& kw : criteria.provided_keywords) {
            const auto tokens = apidm::tokenize(kw);
            bool all = !tokens.empty();
            for (const auto& t : tokens) all = all && ix.terms[c].contains(t);
            if (!all) out[c] = 0.0;
        }
        if (criteria.rejected_components.contains(components[c].id)) out[c] = 0.0;
    }
    return out;
}

/// Averages the vectors of the first min(20, n) components of `ranking`.
inline std::vector<std::string> keywords(const Index& ix, const std::vector<std::uint32_t>& ranking,
                                         const apidm::SearchCriteria& criteria, std::size_t k) {
    const std::size_t pool = std::min<std::size_t>(20, ranking.size());
    Dense mean;
    for (std::size_t i = 0; i < pool; ++i) {
        for (const auto& [t, w] : ix.vectors[ranking[i]]) mean[t] += w / static_cast<double>(pool);
    }
    std::set<std::string> banned;
    if (criteria.query) {
        for (const auto& t : apidm::tokenize(*criteria.query)) banned.insert(t);
    }
    for (const auto* set : {&criteria.provided_keywords, &criteria.rejected_keywords}) {
        for (const auto& kw : *set) {
            for (const auto& t : apidm::tokenize(kw)) banned.insert(t);
        }
    }
    std::vector<std::pair<double, std::string>> ranked;
    for (const auto& [t, w] : mean) {
        if (!banned.contains(t) && w > 0.0) ranked.emplace_back(w, t);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < ranked.size() && i < k; ++i) out.push_back(ranked[i].second);
    return out;
}

}  // namespace oracle
