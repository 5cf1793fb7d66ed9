#include "apidm/episode.hpp"

#include "apidm/error.hpp"

namespace apidm {

std::uint64_t user_seed(std::uint64_t episode_seed) { return mix_seed(episode_seed, 1); }
std::uint64_t session_seed(std::uint64_t episode_seed) { return mix_seed(episode_seed, 2); }

Episode::Episode(std::shared_ptr<const ApiDataset> dataset, std::shared_ptr<const Policy> policy,
                 const SimulatorParams& simulator, const SessionConfig& config, std::uint64_t seed)
    : seed_(seed),
      session_(dataset, std::move(policy), config, session_seed(seed)),
      user_(dataset, user_seed(seed), simulator) {
    const DialogueAct start = session_.transcript().front().act;
    user_.observe_system_act(start);
    session_.apply_user_act(user_.select_act(start));
}

std::size_t Episode::target_rank() const { return session_.state().results.rank_of(user_.target()); }

StepOutcome Episode::step() { return advance(std::nullopt); }
StepOutcome Episode::step(ActType chosen) { return advance(chosen); }

StepOutcome Episode::advance(std::optional<ActType> chosen) {
    if (finished_) throw ContractError("episode already finished");
    const std::size_t rank_before = target_rank();
    const auto preceding = session_.state().last_user_act;

    StepOutcome out;
    out.system_act = chosen ? session_.system_respond(*chosen) : session_.system_respond();
    const std::size_t system_entry = session_.transcript().size() - 1;
    out.substituted_for = session_.transcript().back().substituted_for;
    out.core_reward = session_.transcript().back().reward_core;

    user_.observe_system_act(out.system_act);
    bool unsure = false;
    if (user_.done()) {
        session_.apply_user_act(user_.select_act(out.system_act));
        success_ = true;
        finished_ = true;
    } else if (session_.at_turn_cap()) {
        finished_ = true;
    } else {
        const DialogueAct reply = user_.select_act(out.system_act);
        unsure = reply.type == ActType::Unsure;
        session_.apply_user_act(reply);
    }

    TurnContext ctx;
    ctx.system_act = out.system_act.type;
    ctx.preceding_user_act = preceding;
    ctx.target_rank_before = rank_before;
    ctx.target_rank_after = target_rank();
    ctx.success = success_;
    ctx.user_was_unsure = unsure;
    out.training_reward = training_reward(ctx, session_.config().rewards, session_.dataset().size());
    session_.set_training_reward(system_entry, out.training_reward);

    out.success = success_;
    out.terminal = finished_;
    return out;
}

EpisodeMetrics Episode::metrics() const {
    return {session_.total_core_reward(), success_, session_.state().turn_count, seed_};
}

}  // namespace apidm
