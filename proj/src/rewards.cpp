#include "apidm/rewards.hpp"

#include <algorithm>

#include "apidm/error.hpp"

namespace apidm {

void RewardConfig::validate() const {
    if (turn_penalty > 0 || light_act_penalty > 0 || heavy_act_penalty > 0 || nav_violation_penalty > 0 ||
        unsure_penalty > 0) {
        throw ConfigError("reward penalties must be <= 0");
    }
    if (rank_reward_cap < 0 || success_reward < 0) throw ConfigError("reward bonuses must be >= 0");
}

void to_json(nlohmann::json& j, const RewardConfig& c) {
    j = {{"turn_penalty", c.turn_penalty},
         {"light_act_penalty", c.light_act_penalty},
         {"heavy_act_penalty", c.heavy_act_penalty},
         {"rank_reward_cap", c.rank_reward_cap},
         {"success_reward", c.success_reward},
         {"nav_violation_penalty", c.nav_violation_penalty},
         {"unsure_penalty", c.unsure_penalty}};
}

void from_json(const nlohmann::json& j, RewardConfig& c) {
    RewardConfig d;
    c.turn_penalty = j.value("turn_penalty", d.turn_penalty);
    c.light_act_penalty = j.value("light_act_penalty", d.light_act_penalty);
    c.heavy_act_penalty = j.value("heavy_act_penalty", d.heavy_act_penalty);
    c.rank_reward_cap = j.value("rank_reward_cap", d.rank_reward_cap);
    c.success_reward = j.value("success_reward", d.success_reward);
    c.nav_violation_penalty = j.value("nav_violation_penalty", d.nav_violation_penalty);
    c.unsure_penalty = j.value("unsure_penalty", d.unsure_penalty);
    c.validate();
}

double act_penalty(ActType system_act, const RewardConfig& cfg) {
    switch (system_act) {
        case ActType::ListResults:
        case ActType::SystemChangePage: return cfg.light_act_penalty;
        case ActType::InfoAllAPI:
        case ActType::SuggInfoAPI: return cfg.heavy_act_penalty;
        default: return 0.0;
    }
}

double core_reward(const TurnContext& ctx, const RewardConfig& cfg) {
    const bool exempt = ctx.preceding_user_act && paired_response(*ctx.preceding_user_act) == ctx.system_act;
    return cfg.turn_penalty + (exempt ? 0.0 : act_penalty(ctx.system_act, cfg));
}

double rank_improvement_reward(std::size_t rank_before, std::size_t rank_after, std::size_t dataset_size,
                               const RewardConfig& cfg) {
    if (rank_after >= rank_before || dataset_size < 2) return 0.0;
    const double improvement = static_cast<double>(rank_before - rank_after);
    return std::min(cfg.rank_reward_cap,
                    cfg.rank_reward_cap * improvement / static_cast<double>(dataset_size - 1));
}

bool navigation_violated(const TurnContext& ctx) {
    if (!ctx.preceding_user_act) return false;
    auto expected = paired_response(*ctx.preceding_user_act);
    return expected && *expected != ctx.system_act;
}

double training_reward(const TurnContext& ctx, const RewardConfig& cfg, std::size_t dataset_size) {
    if (!ctx.target_rank_before || !ctx.target_rank_after) {
        throw ContractError("training reward needs the simulator's target ranks");
    }
    double reward = core_reward(ctx, cfg);
    reward += rank_improvement_reward(*ctx.target_rank_before, *ctx.target_rank_after, dataset_size, cfg);
    if (ctx.success) reward += cfg.success_reward;
    if (navigation_violated(ctx)) reward += cfg.nav_violation_penalty;
    if (ctx.user_was_unsure) reward += cfg.unsure_penalty;
    return reward;
}

}  // namespace apidm
