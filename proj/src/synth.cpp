#include "apidm/synth.hpp"

#include <algorithm>
#include <set>

#include "apidm/error.hpp"
#include "apidm/rng.hpp"

namespace apidm {
namespace {

constexpr const char* kOnsets[] = {"b", "c", "d", "f", "g", "h", "k", "l", "m", "n",
                                   "p", "r", "s", "t", "v", "w", "z", "st", "tr", "pl"};
constexpr const char* kVowels[] = {"a", "e", "i", "o", "u", "ai", "ou"};

std::vector<std::string> make_words(std::size_t count, Rng& rng) {
    std::set<std::string> seen;
    std::vector<std::string> words;
    while (words.size() < count) {
        const std::size_t syllables = 2 + rng.below(2);
        std::string word;
        for (std::size_t s = 0; s < syllables; ++s) {
            word += kOnsets[rng.below(std::size(kOnsets))];
            word += kVowels[rng.below(std::size(kVowels))];
        }
        if (rng.bernoulli(0.3)) word += kOnsets[rng.below(std::size(kOnsets))];
        if (seen.insert(word).second) words.push_back(word);
    }
    return words;
}

std::string sentence(const std::vector<std::string>& topic, std::size_t topic_uses,
                     const std::vector<std::string>& words, std::size_t filler, Rng& rng) {
    std::vector<std::string> terms;
    for (std::size_t i = 0; i < topic_uses; ++i) terms.push_back(topic[rng.below(topic.size())]);
    for (std::size_t i = 0; i < filler; ++i) terms.push_back(words[rng.below(words.size())]);
    rng.shuffle(terms);
    std::string out;
    for (const auto& t : terms) {
        if (!out.empty()) out += ' ';
        out += t;
    }
    if (!out.empty()) out += '.';
    return out;
}

}  // namespace

std::vector<ApiComponent> generate_components(const SyntheticCorpusSpec& spec) {
    if (spec.count == 0) throw ConfigError("synthetic corpus needs at least one component");
    if (spec.vocabulary < 8) throw ConfigError("synthetic vocabulary must have at least 8 words");
    Rng rng(spec.seed);
    const auto words = make_words(spec.vocabulary, rng);
    const std::vector<std::string> types = {"int", "void", "size_t", "const char *",
                                            spec.prefix + "_handle", spec.prefix + "_buffer"};

    std::set<std::string> ids;
    std::vector<ApiComponent> components;
    for (std::size_t i = 0; i < spec.count; ++i) {
        std::vector<std::string> topic;
        const std::size_t topic_size = 3 + rng.below(3);
        while (topic.size() < topic_size) {
            const auto& w = words[rng.below(words.size())];
            if (std::find(topic.begin(), topic.end(), w) == topic.end()) topic.push_back(w);
        }

        ApiComponent c;
        std::string id = spec.prefix + "_" + topic[0] + "_" + topic[1];
        if (ids.contains(id)) id += "_" + topic[2];
        while (ids.contains(id)) id += "_" + words[rng.below(words.size())];
        ids.insert(id);
        c.id = id;

        c.signature.name = id;
        c.signature.return_type = types[rng.below(types.size())];
        const std::size_t param_count = 1 + rng.below(3);
        for (std::size_t p = 0; p < param_count; ++p) {
            const std::string name = p == 0 ? topic[2] : words[rng.below(words.size())];
            c.signature.params.push_back({name, types[rng.below(types.size())]});
        }

        c.summary = sentence(topic, 2 + rng.below(2), words, 3 + rng.below(4), rng);

        std::vector<std::pair<std::string, std::string>> optional_props;
        optional_props.emplace_back("description",
                                    sentence(topic, 3 + rng.below(3), words, 10 + rng.below(12), rng));
        std::string param_docs;
        for (const auto& p : c.signature.params) {
            if (!param_docs.empty()) param_docs += '\n';
            param_docs += p.name + ": " + sentence(topic, rng.below(2), words, 3 + rng.below(4), rng);
        }
        optional_props.emplace_back("params", param_docs);
        optional_props.emplace_back("returns", sentence(topic, rng.below(2), words, 3 + rng.below(5), rng));
        const std::size_t keep = 1 + rng.below(optional_props.size());
        optional_props.resize(keep);
        c.properties = std::move(optional_props);
        components.push_back(std::move(c));
    }
    return components;
}

nlohmann::ordered_json generate_corpus_json(const SyntheticCorpusSpec& spec) {
    return dataset_to_json(generate_dataset(spec));
}

ApiDataset generate_dataset(const SyntheticCorpusSpec& spec) {
    return ApiDataset::build(spec.api, generate_components(spec));
}

}  // namespace apidm
