#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "apidm/acts.hpp"
#include "apidm/corpus.hpp"
#include "apidm/rng.hpp"

namespace apidm {

/// P(user act type | most recent system act type).
struct BigramTable {
    std::map<ActType, std::vector<std::pair<ActType, double>>> rows;

    static BigramTable defaults();
    const std::vector<std::pair<ActType, double>>& row(ActType system_act) const;
    void validate() const;
};

/// Simulator knobs. Every magnitude here is a default rather than a measured value.
struct SimulatorParams {
    double query_error_min = 0.1;
    double query_error_max = 0.5;
    double query_error_step = 0.05;  // drop per resolved non-target
    double p_list = 0.4;             // candidacy chance for a listed function
    double p_sugg = 0.8;             // candidacy chance for a suggested function
    int evidence_threshold = 3;
    int evidence_per_property = 1;
    int full_doc_evidence_cap = 3;   // infoAllAPI / suggInfoAPI count min(cap, #properties)
    double expressiveness_min = 0.5;
    double expressiveness_max = 1.0;
    double query_cost = 0.25;
    double keyword_cost = 0.10;
    double exposure_gain = 0.05;     // per function or property shown
    double query_threshold = 0.20;
    double keyword_threshold = 0.10;
    int query_length_min = 2;
    int query_length_max = 5;
    BigramTable bigram = BigramTable::defaults();

    void validate() const;
};

void to_json(nlohmann::json& j, const SimulatorParams& p);
void from_json(const nlohmann::json& j, SimulatorParams& p);
void to_json(nlohmann::json& j, const BigramTable& t);
void from_json(const nlohmann::json& j, BigramTable& t);

struct Candidate {
    std::size_t component;
    int evidence = 0;
};

/// Agenda-style simulated user with a hidden target function.
class SimulatedUser {
public:
    SimulatedUser(std::shared_ptr<const ApiDataset> dataset, std::uint64_t seed, SimulatorParams params = {});

    std::size_t target() const { return target_; }
    const std::string& target_id() const { return dataset_->id(target_); }
    double query_error() const { return query_error_; }
    double expressiveness() const { return expressiveness_; }
    bool done() const { return done_; }
    bool ended() const { return ended_; }
    const std::vector<Candidate>& candidates() const { return candidates_; }
    const std::set<std::size_t>& resolved_pool() const { return resolved_; }
    const SimulatorParams& params() const { return params_; }

    /// Test hooks for constructing specific situations.
    void set_query_error(double e);
    void set_expressiveness(double x);

    /// P(term) = ((1-e) * v_target[term] + e/|V|) / Z over the vocabulary,
    /// with `excluded` terms removed before normalizing.
    std::vector<double> term_distribution(const std::set<std::uint32_t>& excluded = {}) const;
    /// `count` distinct terms drawn sequentially from term_distribution.
    std::vector<std::string> sample_terms(std::size_t count, const std::set<std::uint32_t>& excluded = {});
    /// 2..5 terms joined by spaces.
    std::string generate_query();

    void observe_system_act(const DialogueAct& act);
    /// Next user act; END once the target is found. Calling again after END throws.
    DialogueAct select_act(const DialogueAct& last_system_act);
    /// Acts the user could take after `last_system_act` (before bigram sampling).
    std::vector<ActType> available_acts(const DialogueAct& last_system_act) const;

private:
    void consider(std::size_t component, double probability);
    void present(std::size_t component, int properties);
    void expose(double amount);
    void resolve();
    std::optional<std::size_t> best_candidate() const;
    std::vector<std::string> rejectable_components(const DialogueAct& last) const;
    std::vector<std::string> rejectable_keywords(const DialogueAct& last) const;
    bool is_candidate(std::size_t component) const;

    std::shared_ptr<const ApiDataset> dataset_;
    SimulatorParams params_;
    Rng rng_;
    std::size_t target_ = 0;
    double query_error_ = 0.0;
    double expressiveness_ = 0.0;
    std::vector<Candidate> candidates_;
    std::set<std::size_t> resolved_;
    std::set<std::size_t> rejected_components_;
    std::set<std::string> used_keywords_;
    bool done_ = false;
    bool ended_ = false;
};

}  // namespace apidm
