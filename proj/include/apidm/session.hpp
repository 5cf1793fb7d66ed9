#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "apidm/acts.hpp"
#include "apidm/corpus.hpp"
#include "apidm/rewards.hpp"
#include "apidm/rng.hpp"

namespace apidm {

struct SessionConfig {
    std::size_t results_per_page = 6;   // N
    std::size_t keywords_per_turn = 6;  // K
    int max_turns = 25;
    RewardConfig rewards;

    void validate() const;
};

void to_json(nlohmann::json& j, const SessionConfig& c);
void from_json(const nlohmann::json& j, SessionConfig& c);

inline constexpr int kNeverUnsure = std::numeric_limits<int>::max();

/// What the dialogue manager tracks between turns.
struct DialogueState {
    ActType last_system_act = ActType::Start;
    std::optional<ActType> last_user_act;
    /// The last user act with its payload (policies only read the type).
    std::optional<DialogueAct> last_user;
    int turn_count = 0;
    SearchCriteria criteria;
    RankedResults results;
    /// User turns since the last unsure act; kNeverUnsure if there was none.
    int unsure_recency = kNeverUnsure;

    double top_score() const { return results.top_score(); }
};

/// Read-only view a policy decides from.
struct PolicyInput {
    const DialogueState& state;
    const SessionConfig& config;
    std::size_t dataset_size;
};

class Policy {
public:
    virtual ~Policy() = default;
    virtual std::string name() const = 0;
    /// One of the eight selectable system acts.
    virtual ActType decide(const PolicyInput& input) const = 0;
};

enum class Actor { User, System };

struct TranscriptEntry {
    Actor actor = Actor::System;
    DialogueAct act;
    int turn = 0;
    double reward_core = 0.0;
    std::optional<double> reward_training;
    double top_score = 0.0;
    std::size_t result_index = 0;
    /// Set when the policy's choice could not be fulfilled and listResults was sent instead.
    std::optional<ActType> substituted_for;
};

nlohmann::json transcript_entry_to_json(const TranscriptEntry& e);
TranscriptEntry transcript_entry_from_json(const nlohmann::json& j);

/// One conversation: state tracking plus filling system act payloads from the corpus.
/// Single-threaded; may be moved between threads between turns.
class Session {
public:
    Session(std::shared_ptr<const ApiDataset> dataset, std::shared_ptr<const Policy> policy,
            SessionConfig config, std::uint64_t seed);

    const ApiDataset& dataset() const { return *dataset_; }
    std::shared_ptr<const ApiDataset> dataset_ptr() const { return dataset_; }
    const Policy* policy() const { return policy_.get(); }
    const SessionConfig& config() const { return config_; }
    const DialogueState& state() const { return state_; }
    const std::vector<TranscriptEntry>& transcript() const { return transcript_; }
    std::uint64_t seed() const { return seed_; }

    PolicyInput policy_input() const { return {state_, config_, dataset_->size()}; }

    /// END received or the turn cap reached. A capped session still accepts END.
    bool terminal() const { return ended_ || at_turn_cap(); }
    bool ended() const { return ended_; }
    bool at_turn_cap() const { return state_.turn_count >= config_.max_turns; }
    bool awaiting_response() const { return awaiting_response_; }
    /// Sum of core rewards over system turns so far.
    double total_core_reward() const;

    /// Updates criteria/results for a user act. At the turn cap only END is accepted.
    void apply_user_act(const DialogueAct& act);

    /// Policy picks the act type; the payload is filled from the corpus.
    DialogueAct system_respond();
    /// Same, with the act type chosen by the caller (learning, shadowing, replay).
    DialogueAct system_respond(ActType chosen);

    /// Attaches the shaped reward to a system entry once the user's reaction is known.
    void set_training_reward(std::size_t entry, double reward);

private:
    void rescore();
    std::optional<DialogueAct> fulfill(ActType chosen);

    std::shared_ptr<const ApiDataset> dataset_;
    std::shared_ptr<const Policy> policy_;
    SessionConfig config_;
    std::uint64_t seed_;
    Rng rng_;
    DialogueState state_;
    std::vector<TranscriptEntry> transcript_;
    bool awaiting_response_ = false;
    bool ended_ = false;
};

/// Re-applies the user acts of `transcript` to a fresh session with the same
/// seed and policy; returns the regenerated transcript.
std::vector<TranscriptEntry> replay_transcript(std::shared_ptr<const ApiDataset> dataset,
                                               std::shared_ptr<const Policy> policy, SessionConfig config,
                                               std::uint64_t seed,
                                               const std::vector<TranscriptEntry>& transcript);

}  // namespace apidm
