#pragma once

#include <memory>
#include <string>

#include "apidm/corpus.hpp"
#include "apidm/synth.hpp"

namespace fixtures {

inline std::string path(const std::string& name) { return std::string(APIDM_FIXTURE_DIR) + "/" + name; }

inline std::shared_ptr<const apidm::ApiDataset> toy3() {
    static auto d = std::make_shared<const apidm::ApiDataset>(apidm::load_dataset(path("toy3.json")));
    return d;
}

inline apidm::SyntheticCorpusSpec spec(std::size_t count, std::uint64_t seed = 7) {
    apidm::SyntheticCorpusSpec s;
    s.count = count;
    s.seed = seed;
    s.api = "fixture";
    s.vocabulary = std::max<std::size_t>(60, count * 4);
    return s;
}

inline std::shared_ptr<const apidm::ApiDataset> synthetic(std::size_t count, std::uint64_t seed = 7) {
    return std::make_shared<const apidm::ApiDataset>(apidm::generate_dataset(spec(count, seed)));
}

/// The 100-function corpus the desk-scale experiments run on (generator defaults).
inline std::shared_ptr<const apidm::ApiDataset> desk() {
    static auto d = std::make_shared<const apidm::ApiDataset>(apidm::generate_dataset({}));
    return d;
}

}  // namespace fixtures
