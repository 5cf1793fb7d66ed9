#pragma once

#include <cstddef>
#include <optional>

#include <nlohmann/json.hpp>

#include "apidm/acts.hpp"

namespace apidm {

/// Reward constants. Penalties are stored as the (non-positive) amounts added.
struct RewardConfig {
    double turn_penalty = -1.0;
    double light_act_penalty = -0.3;  // listResults, changePage
    double heavy_act_penalty = -0.5;  // infoAllAPI, suggInfoAPI
    double rank_reward_cap = 5.0;
    double success_reward = 10.0;
    double nav_violation_penalty = -10.0;
    double unsure_penalty = -1.0;

    void validate() const;
};

void to_json(nlohmann::json& j, const RewardConfig& c);
void from_json(const nlohmann::json& j, RewardConfig& c);

struct TurnContext {
    ActType system_act = ActType::ListResults;
    std::optional<ActType> preceding_user_act;
    // Training only: 1-based ranks of the hidden target around this turn.
    std::optional<std::size_t> target_rank_before;
    std::optional<std::size_t> target_rank_after;
    bool success = false;
    bool user_was_unsure = false;
};

/// Per-act penalty, before the standard-navigation exemption.
double act_penalty(ActType system_act, const RewardConfig& cfg = {});

/// Evaluation reward: turn penalty plus the act penalty, unless the system act
/// is the paired answer to the user's standard-navigation request.
double core_reward(const TurnContext& ctx, const RewardConfig& cfg = {});

/// min(cap, cap * improvement / (dataset_size - 1)) for a positive improvement, else 0.
double rank_improvement_reward(std::size_t rank_before, std::size_t rank_after, std::size_t dataset_size,
                               const RewardConfig& cfg = {});

/// Shaped reward for learning; needs the simulator's target ranks.
double training_reward(const TurnContext& ctx, const RewardConfig& cfg, std::size_t dataset_size);

/// True when the user asked for standard navigation and got a different act.
bool navigation_violated(const TurnContext& ctx);

}  // namespace apidm
