// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "apidm/dqn.hpp"
#include "apidm/harness.hpp"
#include "apidm/policies.hpp"
#include "apidm/stats.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace apidm;

namespace {

// Tolerances and budgets.
constexpr double kQCriticalExpected = 5.991;
constexpr double kQCriticalTol = 0.001;
constexpr double kCdExpected = 87.652;
constexpr double kCdTol = 0.01;
constexpr double kOracleTol = 1e-9;
constexpr double kGradientRelTol = 1e-4;
constexpr double kChainTol = 0.05;
constexpr int kDeskEpisodes = 200;
constexpr int kGridEpisodesPerCell = 200;
constexpr long kTrainingSteps = 200000;
constexpr int kMaxTurns = 25;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

struct Criterion {
    std::string name;
    double budget_seconds;
    std::function<void(Outcome&)> run;
};

void reward_table(Outcome& out) {
    const std::vector<ActType> system = {ActType::Start,       ActType::RequestQuery, ActType::SuggKeywords,
                                         ActType::SuggAPI,     ActType::SuggInfoAPI,  ActType::InfoAPI,
                                         ActType::InfoAllAPI,  ActType::ListResults,  ActType::SystemChangePage};
    std::vector<ActType> user;
    for (std::size_t i = 0; i < kActTypeCount; ++i) {
        const auto t = static_cast<ActType>(i);
        if (is_user_act(t) && t != ActType::End) user.push_back(t);
    }
    int cells = 0;
    int exempt = 0;
    for (ActType s : system) {
        const double base = (s == ActType::ListResults || s == ActType::SystemChangePage) ? -1.3
                            : (s == ActType::InfoAllAPI || s == ActType::SuggInfoAPI)    ? -1.5
                                                                                         : -1.0;
        for (ActType u : user) {
            TurnContext ctx;
            ctx.system_act = s;
            ctx.preceding_user_act = u;
            const double r = core_reward(ctx);
            const bool paired = paired_response(u) == s;
            const double expected = paired ? -1.0 : base;
            out.require(r == -1.0 || r == -1.3 || r == -1.5, "value outside {-1, -1.3, -1.5}");
            out.require(std::abs(r - expected) < 1e-12,
                        std::string(act_name(s)) + " after " + std::string(act_name(u)));
            if (paired && base != -1.0) ++exempt;
            ++cells;
        }
    }
    out.require(cells == 99, "matrix is not 9x11");
    int pairs = 0;
    for (ActType u : user) pairs += paired_response(u).has_value() ? 1 : 0;
    out.require(pairs == 5, "five navigation pairs");
    out.detail << "cells=" << cells << " navigation_pairs=" << pairs << " exempted_penalties=" << exempt;
}

void friedman_constants(Outcome& out) {
    const double q = chi_square_quantile(0.95, 2);
    const double cd = friedman_critical_difference(1000, 3, 0.05);
    out.detail.precision(6);
    out.detail << std::fixed << "Q_critical(df=2)=" << q << " CD(n=1000,k=3)=" << cd;
    out.require(std::abs(q - kQCriticalExpected) <= kQCriticalTol, "Q_critical");
    out.require(std::abs(cd - kCdExpected) <= kCdTol, "critical difference");
}

std::vector<SearchCriteria> searches_for(const ApiDataset& d) {
    std::vector<SearchCriteria> out;
    out.push_back({});
    Rng rng(123);
    for (int i = 0; i < 12; ++i) {
        const auto c = rng.below(d.size());
        const auto& terms = d.term_set(c);
        SearchCriteria s;
        std::string q;
        for (int t = 0; t < 3; ++t) q += d.vocabulary()[terms[rng.below(terms.size())]] + " ";
        q += d.vocabulary()[rng.below(d.vocabulary().size())];
        s.query = q;
        if (i % 3 == 1) s.provided_keywords.insert(d.vocabulary()[terms[rng.below(terms.size())]]);
        if (i % 4 == 2) s.rejected_components.insert(d.id(rng.below(d.size())));
        if (i % 5 == 3) {
            const auto& term = d.vocabulary()[rng.below(d.vocabulary().size())];
            if (!s.provided_keywords.contains(term)) s.rejected_keywords.insert(term);
        }
        out.push_back(std::move(s));
    }
    return out;
}

void retrieval_oracle(Outcome& out) {
    const std::vector<std::shared_ptr<const ApiDataset>> corpora = {fixtures::toy3(), fixtures::synthetic(50),
                                                                   fixtures::synthetic(300)};
    double worst_score = 0.0;
    double worst_keyword = 0.0;
    int searches = 0;
    for (const auto& dp : corpora) {
        const auto& d = *dp;
        std::vector<ApiComponent> components(d.components().begin(), d.components().end());
        const auto ix = oracle::build(components);
        for (const auto& criteria : searches_for(d)) {
            ++searches;
            const auto results = score_and_rank(d, criteria, 99);
            const auto expected = oracle::scores(ix, components, criteria);
            for (std::size_t c = 0; c < d.size(); ++c) {
                worst_score = std::max(worst_score, std::abs(results.scores()[c] - expected[c]));
            }
            for (std::size_t i = 1; i < results.size(); ++i) {
                out.require(results.scores()[results.ranking()[i - 1]] >= results.scores()[results.ranking()[i]],
                            "ranking order");
            }
            const auto got = recommend_keywords(d, results, criteria, 6);
            const auto want = oracle::keywords(ix, results.ranking(), criteria, 6);
            out.require(got.size() == want.size(), "keyword count");
            oracle::Dense mean;
            const std::size_t pool = std::min<std::size_t>(20, d.size());
            for (std::size_t i = 0; i < pool; ++i) {
                for (const auto& [t, w] : ix.vectors[results.ranking()[i]]) mean[t] += w / static_cast<double>(pool);
            }
            for (std::size_t i = 0; i < std::min(got.size(), want.size()); ++i) {
                worst_keyword = std::max(worst_keyword, std::abs(mean[got[i]] - mean[want[i]]));
            }
        }
    }
    out.detail << "corpora=3,50,300 searches=" << searches << " max_score_err=" << worst_score
               << " max_keyword_err=" << worst_keyword;
    out.require(worst_score <= kOracleTol, "scores");
    out.require(worst_keyword <= kOracleTol, "keywords");
}

DialogueState state_at(double s) {
    DialogueState state;
    state.last_user_act = ActType::ProvideQuery;
    state.results = RankedResults({s, s / 2}, {0, 1});
    return state;
}

void hand_crafted_excerpts(Outcome& out) {
    const auto r = grid_search(ThresholdGrid::defaults(), fixtures::desk(), {}, kGridEpisodesPerCell, 1);
    const auto& c = r.best;
    const auto low = hand_crafted_decide(state_at(0.206), c);
    const auto high = hand_crafted_decide(state_at(0.597), c);
    out.detail << "best t_query=" << c.t_query << " t_keywords=" << c.t_keywords << " t_sugg=" << c.t_sugg
               << " t_info=" << c.t_info << " s=0.206->" << act_name(low) << " s=0.597->" << act_name(high);
    out.require(low == ActType::SuggAPI, "s=0.206");
    out.require(high == ActType::SuggInfoAPI, "s=0.597");
}

void desk_ordering(Outcome& out) {
    const std::vector<std::shared_ptr<const Policy>> policies = {std::make_shared<SingleTurnPolicy>(),
                                                                 std::make_shared<HandCraftedPolicy>()};
    const auto eval = run_evaluation(fixtures::desk(), policies, kDeskEpisodes, 1, {});
    const auto f = friedman_test(eval.reward_matrix());
    const double gap = f.rank_sums[1] - f.rank_sums[0];
    out.detail << "single-turn=" << eval.mean_core_reward(0) << " hand-crafted=" << eval.mean_core_reward(1)
               << " Q=" << f.q_observed << " gap=" << gap << " CD=" << f.critical_difference;
    out.require(eval.mean_core_reward(1) > eval.mean_core_reward(0), "hand-crafted mean above single-turn");
    out.require(f.q_observed > kQCriticalExpected, "Q above 5.991");
    out.require(gap > f.critical_difference, "rank-sum gap above CD");
}

double gradient_check() {
    Rng rng(77);
    auto net = QNetwork::random({kStateDim, 16, 16, kSelectableActCount}, rng);
    for (std::size_t l = 0; l < net.layers(); ++l) {
        for (double& b : net.biases(l)) b = rng.uniform(-0.1, 0.1);
    }
    std::vector<std::vector<double>> xs(8, std::vector<double>(kStateDim));
    for (auto& x : xs) {
        for (double& v : x) v = rng.uniform(0.0, 1.0);
    }
    std::vector<const std::vector<double>*> inputs;
    std::vector<std::size_t> actions;
    std::vector<double> targets;
    for (const auto& x : xs) {
        inputs.push_back(&x);
        actions.push_back(rng.below(kSelectableActCount));
        targets.push_back(rng.uniform(-3.0, 3.0));
    }
    auto grad = net.zero_gradient();
    net.loss_and_gradient(inputs, actions, targets, grad);
    std::vector<double> flat;
    for (std::size_t l = 0; l < grad.weights.size(); ++l) {
        flat.insert(flat.end(), grad.weights[l].begin(), grad.weights[l].end());
        flat.insert(flat.end(), grad.biases[l].begin(), grad.biases[l].end());
    }
    double worst = 0.0;
    const double h = 1e-6;
    auto scratch = net.zero_gradient();
    for (std::size_t i = 0; i < net.parameter_count(); ++i) {
        auto plus = net;
        auto minus = net;
        plus.set_parameter(i, net.parameter(i) + h);
        minus.set_parameter(i, net.parameter(i) - h);
        const double numeric = (plus.loss_and_gradient(inputs, actions, targets, scratch) -
                                minus.loss_and_gradient(inputs, actions, targets, scratch)) /
                               (2 * h);
        worst = std::max(worst, std::abs(numeric - flat[i]) / std::max(1.0, std::abs(numeric)));
    }
    return worst;
}

double chain_error() {
    std::vector<double> a(kStateDim, 0.0);
    std::vector<double> b(kStateDim, 0.0);
    a[0] = 1.0;
    b[1] = 1.0;
    TrainingConfig cfg;
    cfg.gamma = 0.9;
    cfg.learning_rate = 0.01;
    Rng rng(21);
    auto net = QNetwork::random({kStateDim, 64, 64, kSelectableActCount}, rng);
    auto target = net;
    ReplayBuffer buffer(1000);
    for (std::size_t i = 0; i < 1000; ++i) {
        const std::size_t action = rng.below(kSelectableActCount);
        if (rng.bernoulli(0.5)) {
            buffer.push({a, action, 0.0, action == 0 ? b : a, action != 0});
        } else {
            buffer.push({b, action, 1.0, b, true});
        }
    }
    for (int step = 1; step <= 5000; ++step) {
        train_step(net, target, buffer.sample(32, rng), cfg);
        if (step % 100 == 0) target = net;
    }
    // Value iteration: Q*(A, a0) = 0.9, Q*(A, other) = 0, Q*(B, any) = 1.
    const auto qa = net.forward(a);
    const auto qb = net.forward(b);
    double worst = std::abs(qa[0] - 0.9);
    for (std::size_t i = 1; i < kSelectableActCount; ++i) worst = std::max(worst, std::abs(qa[i]));
    for (double q : qb) worst = std::max(worst, std::abs(q - 1.0));
    return worst;
}

void dqn_sanity(Outcome& out) {
    const double grad = gradient_check();
    const double chain = chain_error();
    TrainingConfig cfg;
    cfg.total_steps = kTrainingSteps;
    const auto t0 = std::chrono::steady_clock::now();
    auto trained = train_policy(fixtures::desk(), {}, {}, cfg, 1);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const std::vector<std::shared_ptr<const Policy>> policies = {
        std::make_shared<LearnedPolicy>(std::make_shared<const QNetwork>(std::move(trained.net))),
        std::make_shared<SingleTurnPolicy>()};
    const auto eval = run_evaluation(fixtures::desk(), policies, 200, cfg.eval_seed, {}, {}, 1);
    out.detail << "(a) max_rel_grad_err=" << grad << " (b) max_chain_err=" << chain << " (c) steps=" << trained.steps
               << " train_s=" << seconds << " learned=" << eval.mean_core_reward(0)
               << " single-turn=" << eval.mean_core_reward(1);
    out.require(grad <= kGradientRelTol, "(a) gradient check");
    out.require(chain <= kChainTol, "(b) chain MDP");
    out.require(trained.steps == kTrainingSteps, "(c) step count");
    out.require(seconds < 30 * 60, "(c) training time");
    out.require(eval.mean_core_reward(0) >= eval.mean_core_reward(1), "(c) learned >= single-turn");
}

void determinism(Outcome& out) {
    const auto d = fixtures::desk();
    const auto hc = std::make_shared<const HandCraftedPolicy>();
    bool transcripts = true;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto a = run_episode(d, hc, {}, seed);
        const auto b = run_episode(d, hc, {}, seed);
        nlohmann::json ja = nlohmann::json::array();
        nlohmann::json jb = nlohmann::json::array();
        for (const auto& e : a.transcript) ja.push_back(transcript_entry_to_json(e));
        for (const auto& e : b.transcript) jb.push_back(transcript_entry_to_json(e));
        transcripts = transcripts && ja.dump() == jb.dump() && a.metrics == b.metrics;
    }
    const std::vector<std::shared_ptr<const Policy>> policies = {std::make_shared<SingleTurnPolicy>(), hc};
    const auto e1 = run_evaluation(d, policies, 100, 7, {});
    const auto e2 = run_evaluation(d, policies, 100, 7, {});
    const bool metrics = e1.columns == e2.columns && evaluation_to_csv(e1) == evaluation_to_csv(e2);
    const std::vector<std::shared_ptr<const Policy>> twins = {hc, std::make_shared<HandCraftedPolicy>()};
    const auto tw = run_evaluation(d, twins, 100, 7, {});
    const bool paired = tw.columns[0] == tw.columns[1];
    TrainingConfig cfg;
    cfg.total_steps = 4000;
    cfg.eval_every = 1000;
    cfg.eval_episodes = 20;
    const auto c1 = train_policy(d, {}, {}, cfg, 3);
    const auto c2 = train_policy(d, {}, {}, cfg, 3);
    const bool curves = c1.curve == c2.curve && c1.net == c2.net && curve_to_csv(c1.curve) == curve_to_csv(c2.curve);
    out.detail << "transcripts=" << transcripts << " metrics=" << metrics << " identical_policy_columns=" << paired
               << " curves=" << curves;
    out.require(transcripts, "transcripts");
    out.require(metrics, "metrics");
    out.require(paired, "identical policies");
    out.require(curves, "learning curves");
}

/// Picks actions uniformly at random; stresses the turn cap.
class RandomPolicy final : public Policy {
public:
    std::string name() const override { return "random"; }
    ActType decide(const PolicyInput& input) const override {
        Rng rng(input.state.turn_count * 7919 + static_cast<std::uint64_t>(input.state.results.top_score() * 1e6));
        return action_at(rng.below(kSelectableActCount));
    }
};

void episode_cap(Outcome& out) {
    const auto d = fixtures::desk();
    const std::vector<std::shared_ptr<const Policy>> policies = {
        std::make_shared<SingleTurnPolicy>(), std::make_shared<HandCraftedPolicy>(), std::make_shared<RandomPolicy>()};
    int longest = 0;
    int capped = 0;
    int capped_successes = 0;
    int episodes = 0;
    for (const auto& p : policies) {
        for (std::uint64_t seed = 0; seed < 300; ++seed) {
            const auto r = run_episode(d, p, {}, seed);
            ++episodes;
            int turns = 0;
            for (const auto& e : r.transcript) turns = std::max(turns, e.turn);
            longest = std::max(longest, turns);
            if (r.transcript.back().act.type != ActType::End) {
                ++capped;
                if (r.metrics.success) ++capped_successes;
            }
        }
    }
    out.detail << "episodes=" << episodes << " longest=" << longest << " capped=" << capped
               << " capped_successes=" << capped_successes;
    out.require(longest <= kMaxTurns, "turn cap");
    out.require(capped > 0, "some episodes reach the cap");
    out.require(capped_successes == 0, "capped episodes unsuccessful");
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {"reward-table", 1.0, reward_table},
        {"friedman-constants", 1.0, friedman_constants},
        {"retrieval-oracle", 10.0, retrieval_oracle},
        {"hand-crafted-excerpts", 60.0, hand_crafted_excerpts},
        {"desk-scale-ordering", 120.0, desk_ordering},
        {"dqn-sanity", 30 * 60.0, dqn_sanity},
        {"determinism", 300.0, determinism},
        {"episode-cap", 60.0, episode_cap},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        Outcome out;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            c.run(out);
        } catch (const std::exception& e) {
            out.pass = false;
            out.detail << " [exception: " << e.what() << "]";
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.require(seconds < c.budget_seconds, "runtime budget");
        if (!out.pass) ++failures;
        std::printf("%s %s (%.2fs, budget %.0fs): %s\n", out.pass ? "PASS" : "FAIL", c.name.c_str(), seconds,
                    c.budget_seconds, out.detail.str().c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
