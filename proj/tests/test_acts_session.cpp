#include <doctest.h>

#include "apidm/error.hpp"
#include "apidm/policies.hpp"
#include "apidm/rewards.hpp"
#include "fixtures.hpp"

using namespace apidm;

namespace {

TurnContext turn(ActType system, std::optional<ActType> user) {
    TurnContext ctx;
    ctx.system_act = system;
    ctx.preceding_user_act = user;
    return ctx;
}

/// Returns the act chosen by the test, regardless of state.
class Scripted final : public Policy {
public:
    explicit Scripted(ActType a) : act_(a) {}
    std::string name() const override { return "scripted"; }
    ActType decide(const PolicyInput&) const override { return act_; }

private:
    ActType act_;
};

Session toy_session(std::shared_ptr<const Policy> policy = std::make_shared<SingleTurnPolicy>(), SessionConfig cfg = {}) {
    return Session(fixtures::toy3(), std::move(policy), cfg, 11);
}

}  // namespace

TEST_CASE("action space: eight selectable system acts, disjoint speakers") {
    std::size_t selectable = 0;
    for (std::size_t i = 0; i < kActTypeCount; ++i) {
        const auto t = static_cast<ActType>(i);
        CHECK(is_system_act(t) != is_user_act(t));
        if (is_selectable(t)) {
            CHECK(action_at(action_index(t)) == t);
            ++selectable;
        }
    }
    CHECK(selectable == 8);
    CHECK_FALSE(is_selectable(ActType::Start));
    CHECK(parse_act_name("changePage", true) == ActType::UserChangePage);
    CHECK(parse_act_name("changePage", false) == ActType::SystemChangePage);
    CHECK_FALSE(parse_act_name("elicitQuery", false).has_value());
}

TEST_CASE("act JSON round-trips and payloads are validated") {
    const std::vector<DialogueAct> acts = {
        DialogueAct::query("open an ssh session"),
        DialogueAct::keyword("knownhost"),
        {ActType::RejectKeywords, payload::Keywords{{"socket"}}},
        {ActType::RejectComponents, payload::Components{{"ssh_connect"}}},
        {ActType::ElicitInfoAPI, payload::Properties{"ssh_connect", {"summary"}}},
        {ActType::ListResults, payload::Page{{"ssh_connect", "ssh_channel_write"}}},
        DialogueAct::simple(ActType::UserChangePage),
        {ActType::SystemChangePage, payload::Page{{"ssh_write_knownhost"}}},
        DialogueAct::simple(ActType::End),
    };
    for (const auto& a : acts) {
        CHECK(act_from_json(act_to_json(a)) == a);
        CHECK_NOTHROW(validate_act(a, fixtures::toy3().get()));
    }
    CHECK_THROWS_AS(validate_act({ActType::ProvideQuery, payload::Keyword{"x"}}), ContractError);
    CHECK_THROWS_AS(validate_act(DialogueAct::query("   ")), ContractError);
    CHECK_THROWS_AS(validate_act({ActType::ElicitInfoAllAPI, payload::Component{"nope"}}, fixtures::toy3().get()),
                    ContractError);
    CHECK_THROWS_AS(validate_act({ActType::ElicitInfoAPI, payload::Properties{"ssh_connect", {"examples"}}},
                                 fixtures::toy3().get()),
                    ContractError);
    CHECK_THROWS_AS(act_from_json(nlohmann::json{{"act_type", "provideQuery"}}), ContractError);
    CHECK_THROWS_AS(act_from_json(nlohmann::json{{"act_type", "bogus"}}), ContractError);
}

TEST_CASE("core reward table") {
    CHECK(core_reward(turn(ActType::ListResults, ActType::ProvideQuery)) == doctest::Approx(-1.3));
    CHECK(core_reward(turn(ActType::ListResults, ActType::ElicitListResults)) == doctest::Approx(-1.0));
    CHECK(core_reward(turn(ActType::SuggInfoAPI, ActType::ProvideKeyword)) == doctest::Approx(-1.5));
    CHECK(core_reward(turn(ActType::InfoAllAPI, ActType::ElicitInfoAllAPI)) == doctest::Approx(-1.0));
    CHECK(core_reward(turn(ActType::InfoAllAPI, ActType::ElicitInfoAPI)) == doctest::Approx(-1.5));
    CHECK(core_reward(turn(ActType::SystemChangePage, ActType::UserChangePage)) == doctest::Approx(-1.0));
    CHECK(core_reward(turn(ActType::SuggAPI, ActType::ElicitSuggAPI)) == doctest::Approx(-1.0));
    CHECK(core_reward(turn(ActType::RequestQuery, std::nullopt)) == doctest::Approx(-1.0));
}

TEST_CASE("training reward shaping") {
    auto ctx = turn(ActType::ListResults, ActType::ProvideQuery);
    ctx.target_rank_before = 264;
    ctx.target_rank_after = 1;
    CHECK(training_reward(ctx, {}, 264) == doctest::Approx(3.7));

    ctx = turn(ActType::InfoAPI, ActType::ElicitInfoAPI);
    ctx.target_rank_before = ctx.target_rank_after = 4;
    ctx.success = true;
    CHECK(training_reward(ctx, {}, 264) == doctest::Approx(9.0));

    ctx = turn(ActType::SuggAPI, ActType::ElicitListResults);
    ctx.target_rank_before = ctx.target_rank_after = 4;
    CHECK(training_reward(ctx, {}, 264) == doctest::Approx(-11.0));

    ctx = turn(ActType::RequestQuery, ActType::Unsure);
    ctx.target_rank_before = ctx.target_rank_after = 2;
    ctx.user_was_unsure = true;
    CHECK(training_reward(ctx, {}, 10) == doctest::Approx(-2.0));

    ctx.user_was_unsure = false;
    CHECK(training_reward(ctx, {}, 10) == core_reward(ctx));
    ctx.target_rank_before.reset();
    CHECK_THROWS_AS(training_reward(ctx, {}, 10), ContractError);

    double previous = 0.0;
    for (std::size_t after = 99; after >= 1; --after) {
        const double r = rank_improvement_reward(100, after, 100);
        CHECK(r > previous);
        CHECK(r <= 5.0);
        previous = r;
    }
    CHECK(rank_improvement_reward(3, 5, 100) == 0.0);
    CHECK(rank_improvement_reward(5, 5, 100) == 0.0);
}

TEST_CASE("reward config validation and JSON") {
    RewardConfig bad;
    bad.success_reward = -1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    RewardConfig c;
    c.light_act_penalty = -0.2;
    CHECK(nlohmann::json(c).get<RewardConfig>().light_act_penalty == -0.2);
}

TEST_CASE("new session: defaults, determinism and config errors") {
    const SessionConfig defaults;
    CHECK(defaults.results_per_page == 6);
    CHECK(defaults.keywords_per_turn == 6);
    CHECK(defaults.max_turns == 25);
    auto a = toy_session();
    auto b = toy_session();
    CHECK(a.state().results.ranking() == b.state().results.ranking());
    CHECK(a.state().last_system_act == ActType::Start);
    CHECK_FALSE(a.state().last_user_act.has_value());
    CHECK(a.transcript().size() == 1);
    CHECK(a.transcript().front().act.type == ActType::Start);
    SessionConfig zero;
    zero.max_turns = 0;
    CHECK_THROWS_AS(toy_session(nullptr, zero), ConfigError);
}

TEST_CASE("apply_user_act updates criteria") {
    auto s = toy_session();
    s.apply_user_act(DialogueAct::keyword("knownhost"));
    CHECK(s.state().criteria.provided_keywords.contains("knownhost"));
    CHECK(s.state().results.result_index() == 0);
    CHECK(s.state().results.positive_count() == 1);
    CHECK_THROWS_AS(s.apply_user_act(DialogueAct::query("again")), ContractError);
    s.system_respond();

    const auto before = s.state().results.ranking();
    s.apply_user_act({ActType::RejectKeywords, payload::Keywords{{"socket"}}});
    CHECK(s.state().results.ranking() == before);
    CHECK(s.state().criteria.rejected_keywords.contains("socket"));
    s.system_respond();

    s.apply_user_act(DialogueAct::simple(ActType::Unsure));
    CHECK(s.state().unsure_recency == 0);
    CHECK(s.state().criteria.provided_keywords.size() == 1);
    s.system_respond();
    s.apply_user_act(DialogueAct::query("write"));
    CHECK(s.state().unsure_recency == 1);
    s.system_respond();

    CHECK_THROWS_AS(s.apply_user_act(DialogueAct::simple(ActType::ListResults)), ContractError);
    CHECK_THROWS_AS(s.apply_user_act({ActType::RejectComponents, payload::Components{{"unknown"}}}), ContractError);

    const int turns = s.state().turn_count;
    s.apply_user_act(DialogueAct::simple(ActType::Restart));
    CHECK(s.state().criteria.empty());
    CHECK(s.state().turn_count == turns);
    CHECK(s.system_respond().type == ActType::RequestQuery);

    s.apply_user_act(DialogueAct::simple(ActType::End));
    CHECK(s.terminal());
    CHECK_THROWS_AS(s.apply_user_act(DialogueAct::query("more")), ContractError);
}

TEST_CASE("system_respond fills payloads from the corpus") {
    auto s = toy_session();
    s.apply_user_act(DialogueAct::simple(ActType::ElicitListResults));
    auto act = s.system_respond();
    CHECK(act.type == ActType::ListResults);
    CHECK(std::get<payload::Page>(act.payload).ids.size() == 3);
    CHECK(s.state().results.result_index() == 0);
    CHECK(s.transcript().back().reward_core == doctest::Approx(-1.0));

    s.apply_user_act({ActType::ElicitInfoAPI, payload::Properties{"ssh_connect", {"summary"}}});
    act = s.system_respond();
    CHECK(act.type == ActType::InfoAPI);
    CHECK(std::get<payload::Properties>(act.payload) == payload::Properties{"ssh_connect", {"summary"}});

    s.apply_user_act({ActType::ElicitInfoAllAPI, payload::Component{"ssh_channel_write"}});
    act = s.system_respond();
    CHECK(act.type == ActType::InfoAllAPI);
    CHECK(act.component_id() == "ssh_channel_write");

    s.apply_user_act(DialogueAct::simple(ActType::ElicitSuggAPI));
    act = s.system_respond();
    CHECK(act.type == ActType::SuggAPI);
    CHECK(act.component_id() == s.dataset().id(s.state().results.ranking()[0]));
    CHECK(s.state().results.result_index() == 1);

    s.apply_user_act(DialogueAct::query("open an ssh session"));
    CHECK(s.system_respond().type == ActType::ListResults);
    CHECK(s.transcript().back().reward_core == doctest::Approx(-1.3));
    CHECK(s.state().turn_count == 5);
}

TEST_CASE("paging through results and substitution of unfulfillable acts") {
    SessionConfig cfg;
    cfg.results_per_page = 2;
    auto s = toy_session(std::make_shared<SingleTurnPolicy>(), cfg);
    s.apply_user_act(DialogueAct::simple(ActType::ElicitListResults));
    s.system_respond();
    s.apply_user_act(DialogueAct::simple(ActType::UserChangePage));
    auto act = s.system_respond();
    CHECK(act.type == ActType::SystemChangePage);
    CHECK(std::get<payload::Page>(act.payload).ids.size() == 1);
    CHECK(s.state().results.result_index() == 2);
    s.apply_user_act(DialogueAct::simple(ActType::UserChangePage));
    act = s.system_respond();
    CHECK(act.type == ActType::ListResults);
    CHECK(s.transcript().back().substituted_for == ActType::SystemChangePage);
    CHECK(s.state().results.result_index() == 0);

    auto t = toy_session(std::make_shared<Scripted>(ActType::SuggAPI));
    for (int i = 0; i < 3; ++i) {
        t.apply_user_act(DialogueAct::simple(ActType::Unsure));
        CHECK(t.system_respond().type == ActType::SuggAPI);
    }
    t.apply_user_act(DialogueAct::simple(ActType::Unsure));
    CHECK(t.system_respond().type == ActType::ListResults);
    CHECK(t.transcript().back().substituted_for == ActType::SuggAPI);

    auto u = toy_session(std::make_shared<Scripted>(ActType::InfoAPI));
    u.apply_user_act(DialogueAct::query("connect"));
    CHECK(u.system_respond().type == ActType::ListResults);
    CHECK(u.transcript().back().substituted_for == ActType::InfoAPI);
}

TEST_CASE("turn cap: only END is accepted once max_turns is reached") {
    SessionConfig cfg;
    cfg.max_turns = 3;
    auto s = toy_session(std::make_shared<SingleTurnPolicy>(), cfg);
    for (int i = 0; i < 3; ++i) {
        s.apply_user_act(DialogueAct::simple(ActType::Unsure));
        s.system_respond();
    }
    CHECK(s.terminal());
    CHECK_FALSE(s.ended());
    CHECK_THROWS_AS(s.apply_user_act(DialogueAct::simple(ActType::Unsure)), ContractError);
    s.apply_user_act(DialogueAct::simple(ActType::End));
    CHECK(s.ended());
    CHECK(s.state().turn_count == 3);
}

TEST_CASE("transcript JSON and replay reproduce the system acts") {
    auto s = toy_session(std::make_shared<HandCraftedPolicy>());
    const std::vector<DialogueAct> user = {DialogueAct::query("write data to a channel"), DialogueAct::keyword("channel"),
                                           DialogueAct::simple(ActType::ElicitSuggAPI),
                                           DialogueAct::simple(ActType::Unsure), DialogueAct::simple(ActType::End)};
    for (const auto& a : user) {
        s.apply_user_act(a);
        if (s.awaiting_response()) s.system_respond();
    }
    std::vector<TranscriptEntry> parsed;
    for (const auto& e : s.transcript()) {
        const auto j = transcript_entry_to_json(e);
        CHECK(j.contains("r"));
        parsed.push_back(transcript_entry_from_json(j));
    }
    const auto replayed = replay_transcript(fixtures::toy3(), std::make_shared<HandCraftedPolicy>(), {}, 11, parsed);
    REQUIRE(replayed.size() == s.transcript().size());
    for (std::size_t i = 0; i < replayed.size(); ++i) {
        CHECK(replayed[i].act == s.transcript()[i].act);
        CHECK(replayed[i].reward_core == s.transcript()[i].reward_core);
    }
    const auto offline = replay_transcript(fixtures::toy3(), nullptr, {}, 11, parsed);
    CHECK(offline.size() == replayed.size());
    CHECK(offline.back().act == replayed.back().act);
}
