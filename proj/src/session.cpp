#include "apidm/session.hpp"

#include <algorithm>
#include <cctype>

#include "apidm/error.hpp"

namespace apidm {

void SessionConfig::validate() const {
    if (results_per_page < 1) throw ConfigError("N (results per page) must be >= 1");
    if (keywords_per_turn < 1) throw ConfigError("K (keywords per turn) must be >= 1");
    if (max_turns < 1) throw ConfigError("max_turns must be >= 1");
    rewards.validate();
}

void to_json(nlohmann::json& j, const SessionConfig& c) {
    j = {{"results_per_page", c.results_per_page},
         {"keywords_per_turn", c.keywords_per_turn},
         {"max_turns", c.max_turns},
         {"rewards", c.rewards}};
}

void from_json(const nlohmann::json& j, SessionConfig& c) {
    SessionConfig d;
    c.results_per_page = j.value("results_per_page", d.results_per_page);
    c.keywords_per_turn = j.value("keywords_per_turn", d.keywords_per_turn);
    c.max_turns = j.value("max_turns", d.max_turns);
    c.rewards = j.contains("rewards") ? j.at("rewards").get<RewardConfig>() : d.rewards;
    c.validate();
}

nlohmann::json transcript_entry_to_json(const TranscriptEntry& e) {
    nlohmann::json j = {{"actor", e.actor == Actor::User ? "user" : "system"},
                        {"act_type", act_name(e.act.type)},
                        {"payload", payload_to_json(e.act.payload)},
                        {"turn", e.turn},
                        {"reward_core", e.reward_core},
                        {"top_score", e.top_score},
                        {"r", e.result_index}};
    if (e.reward_training) j["reward_training"] = *e.reward_training;
    if (e.substituted_for) j["substituted_for"] = act_name(*e.substituted_for);
    return j;
}

TranscriptEntry transcript_entry_from_json(const nlohmann::json& j) {
    TranscriptEntry e;
    e.act = act_from_json(j);
    e.actor = is_user_act(e.act.type) ? Actor::User : Actor::System;
    e.turn = j.value("turn", 0);
    e.reward_core = j.value("reward_core", 0.0);
    e.top_score = j.value("top_score", 0.0);
    e.result_index = j.value("r", std::size_t{0});
    if (j.contains("reward_training")) e.reward_training = j.at("reward_training").get<double>();
    if (j.contains("substituted_for")) {
        e.substituted_for = parse_act_name(j.at("substituted_for").get<std::string>(), false);
    }
    return e;
}

Session::Session(std::shared_ptr<const ApiDataset> dataset, std::shared_ptr<const Policy> policy,
                 SessionConfig config, std::uint64_t seed)
    : dataset_(std::move(dataset)), policy_(std::move(policy)), config_(config), seed_(seed), rng_(seed) {
    if (!dataset_) throw ContractError("session needs a dataset");
    config_.validate();
    rescore();
    TranscriptEntry start;
    start.actor = Actor::System;
    start.act = DialogueAct::start();
    start.top_score = state_.top_score();
    transcript_.push_back(std::move(start));
}

double Session::total_core_reward() const {
    double total = 0.0;
    for (const auto& e : transcript_) {
        if (e.actor == Actor::System && e.turn > 0) total += e.reward_core;
    }
    return total;
}

void Session::rescore() {
    state_.results = score_and_rank(*dataset_, state_.criteria, rng_.next());
}

void Session::apply_user_act(const DialogueAct& act) {
    if (!is_user_act(act.type)) throw ContractError("apply_user_act: '" + std::string(act_name(act.type)) + "' is a system act");
    if (ended_) throw ContractError("apply_user_act: session already ended");
    if (awaiting_response_) throw ContractError("apply_user_act: the previous user act has not been answered");
    if (at_turn_cap() && act.type != ActType::End) throw ContractError("apply_user_act: turn limit reached");
    validate_act(act, dataset_.get());

    auto& criteria = state_.criteria;
    switch (act.type) {
        case ActType::ProvideQuery:
            criteria.query = std::get<payload::Query>(act.payload).text;
            rescore();
            break;
        case ActType::ProvideKeyword: {
            std::string term = std::get<payload::Keyword>(act.payload).term;
            std::transform(term.begin(), term.end(), term.begin(),
                           [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
            criteria.rejected_keywords.erase(term);
            criteria.provided_keywords.insert(term);
            rescore();
            break;
        }
        case ActType::RejectKeywords:
            // Rejection only steers keyword recommendation; ranking is untouched.
            for (auto term : std::get<payload::Keywords>(act.payload).terms) {
                std::transform(term.begin(), term.end(), term.begin(),
                               [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
                if (!criteria.provided_keywords.contains(term)) criteria.rejected_keywords.insert(term);
            }
            break;
        case ActType::RejectComponents:
            for (const auto& id : std::get<payload::Components>(act.payload).ids) {
                criteria.rejected_components.insert(id);
            }
            rescore();
            break;
        case ActType::Restart:
            criteria = SearchCriteria{};
            rescore();
            break;
        case ActType::End:
            ended_ = true;
            break;
        default:
            break;
    }

    state_.last_user_act = act.type;
    state_.last_user = act;
    if (act.type == ActType::Unsure) {
        state_.unsure_recency = 0;
    } else if (state_.unsure_recency != kNeverUnsure) {
        ++state_.unsure_recency;
    }
    awaiting_response_ = !ended_;

    TranscriptEntry entry;
    entry.actor = Actor::User;
    entry.act = act;
    entry.turn = state_.turn_count;
    entry.top_score = state_.top_score();
    entry.result_index = state_.results.result_index();
    transcript_.push_back(std::move(entry));
}

DialogueAct Session::system_respond() {
    if (!policy_) throw ContractError("system_respond: session has no policy");
    if (!awaiting_response_) throw ContractError("system_respond: no user act to answer");
    // The study tool answers a restart by prompting for a new query.
    if (state_.last_user_act == ActType::Restart) return system_respond(ActType::RequestQuery);
    return system_respond(policy_->decide(policy_input()));
}

std::optional<DialogueAct> Session::fulfill(ActType chosen) {
    auto& results = state_.results;
    auto page_ids = [this](const std::vector<std::uint32_t>& indices) {
        payload::Page page;
        for (auto i : indices) page.ids.push_back(dataset_->id(i));
        return page;
    };
    switch (chosen) {
        case ActType::RequestQuery:
            return DialogueAct{chosen, {}};
        case ActType::SuggKeywords: {
            auto terms = recommend_keywords(*dataset_, results, state_.criteria, config_.keywords_per_turn);
            if (terms.empty()) return std::nullopt;
            return DialogueAct{chosen, payload::Keywords{std::move(terms)}};
        }
        case ActType::SuggAPI:
        case ActType::SuggInfoAPI:
            if (results.exhausted()) return std::nullopt;
            return DialogueAct{chosen, payload::Component{dataset_->id(results.next_suggestion())}};
        case ActType::InfoAPI:
            if (state_.last_user && state_.last_user->type == ActType::ElicitInfoAPI) {
                return DialogueAct{chosen, std::get<payload::Properties>(state_.last_user->payload)};
            }
            return std::nullopt;
        case ActType::InfoAllAPI:
            if (state_.last_user) {
                if (auto id = state_.last_user->component_id()) return DialogueAct{chosen, payload::Component{*id}};
            }
            return std::nullopt;
        case ActType::ListResults:
            results.reset_cursor();
            return DialogueAct{chosen, page_ids(results.window(config_.results_per_page))};
        case ActType::SystemChangePage: {
            if (results.result_index() + config_.results_per_page >= results.size()) return std::nullopt;
            results.advance(config_.results_per_page);
            return DialogueAct{chosen, page_ids(results.window(config_.results_per_page))};
        }
        default:
            throw ContractError("system_respond: '" + std::string(act_name(chosen)) + "' is not selectable");
    }
}

DialogueAct Session::system_respond(ActType chosen) {
    if (!awaiting_response_) throw ContractError("system_respond: no user act to answer");
    if (!is_selectable(chosen)) throw ContractError("system_respond: not a selectable system act");

    std::optional<ActType> substituted_for;
    auto act = fulfill(chosen);
    if (!act) {
        substituted_for = chosen;
        act = fulfill(ActType::ListResults);
    }

    ++state_.turn_count;
    state_.last_system_act = act->type;
    awaiting_response_ = false;

    TranscriptEntry entry;
    entry.actor = Actor::System;
    entry.act = *act;
    entry.turn = state_.turn_count;
    TurnContext ctx;
    ctx.system_act = act->type;
    ctx.preceding_user_act = state_.last_user_act;
    entry.reward_core = core_reward(ctx, config_.rewards);
    entry.top_score = state_.top_score();
    entry.result_index = state_.results.result_index();
    entry.substituted_for = substituted_for;
    transcript_.push_back(std::move(entry));
    return *act;
}

void Session::set_training_reward(std::size_t entry, double reward) {
    if (entry >= transcript_.size() || transcript_[entry].actor != Actor::System) {
        throw ContractError("set_training_reward: not a system entry");
    }
    transcript_[entry].reward_training = reward;
}

std::vector<TranscriptEntry> replay_transcript(std::shared_ptr<const ApiDataset> dataset,
                                               std::shared_ptr<const Policy> policy, SessionConfig config,
                                               std::uint64_t seed,
                                               const std::vector<TranscriptEntry>& transcript) {
    const bool use_policy = policy != nullptr;
    Session session(std::move(dataset), std::move(policy), config, seed);
    for (std::size_t i = 0; i < transcript.size(); ++i) {
        const auto& e = transcript[i];
        if (e.actor != Actor::User) continue;
        session.apply_user_act(e.act);
        if (!session.awaiting_response()) continue;
        if (use_policy) {
            session.system_respond();
        } else if (i + 1 < transcript.size() && transcript[i + 1].actor == Actor::System) {
            const auto& reply = transcript[i + 1];
            session.system_respond(reply.substituted_for.value_or(reply.act.type));
        }
    }
    return session.transcript();
}

}  // namespace apidm
