#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "apidm/corpus.hpp"

namespace apidm {

/// Knobs for synthetic API corpora used in desk-scale experiments.
struct SyntheticCorpusSpec {
    std::size_t count = 100;
    std::size_t vocabulary = 400;
    std::uint64_t seed = 1;
    std::string api = "synthetic";
    std::string prefix = "syn";
};

/// Components named like C API functions (prefix_topic_topic) with a summary,
/// description, parameter and return documentation drawn from a seeded vocabulary.
std::vector<ApiComponent> generate_components(const SyntheticCorpusSpec& spec);
nlohmann::ordered_json generate_corpus_json(const SyntheticCorpusSpec& spec);
ApiDataset generate_dataset(const SyntheticCorpusSpec& spec);

}  // namespace apidm
