#pragma once

#include <cstdint>
#include <memory>
#include <optional>

#include "apidm/session.hpp"
#include "apidm/usersim.hpp"

namespace apidm {

struct EpisodeMetrics {
    double total_core_reward = 0.0;
    bool success = false;
    int turns = 0;
    std::uint64_t seed = 0;

    bool operator==(const EpisodeMetrics&) const = default;
};

struct StepOutcome {
    DialogueAct system_act;
    std::optional<ActType> substituted_for;
    double core_reward = 0.0;
    double training_reward = 0.0;
    bool success = false;
    bool terminal = false;
};

/// Seeds for the simulated user and the session tie-breaks, both derived from
/// one episode seed so paired runs share identical user parameters.
std::uint64_t user_seed(std::uint64_t episode_seed);
std::uint64_t session_seed(std::uint64_t episode_seed);

/// A session driven by a simulated user: START, the user's opening act, then one
/// step() per system turn until END or the turn cap.
class Episode {
public:
    Episode(std::shared_ptr<const ApiDataset> dataset, std::shared_ptr<const Policy> policy,
            const SimulatorParams& simulator, const SessionConfig& config, std::uint64_t seed);

    bool finished() const { return finished_; }
    bool success() const { return success_; }
    const Session& session() const { return session_; }
    const SimulatedUser& user() const { return user_; }
    std::uint64_t seed() const { return seed_; }

    /// 1-based rank of the hidden target in the current results.
    std::size_t target_rank() const;

    StepOutcome step();
    StepOutcome step(ActType chosen);

    EpisodeMetrics metrics() const;

private:
    StepOutcome advance(std::optional<ActType> chosen);

    std::uint64_t seed_;
    Session session_;
    SimulatedUser user_;
    bool finished_ = false;
    bool success_ = false;
};

}  // namespace apidm
