#include "apidm/harness.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "apidm/error.hpp"

namespace apidm {

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& work) {
    if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) work(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    work(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

EpisodeResult run_episode(std::shared_ptr<const ApiDataset> dataset, std::shared_ptr<const Policy> policy,
                          const SimulatorParams& simulator, std::uint64_t seed, const SessionConfig& config) {
    if (!policy) throw ContractError("run_episode needs a policy");
    Episode episode(std::move(dataset), std::move(policy), simulator, config, seed);
    while (!episode.finished()) episode.step();
    return {episode.metrics(), episode.session().transcript()};
}

double EvaluationResult::mean_core_reward(std::size_t policy) const {
    const auto& col = columns.at(policy);
    double sum = 0.0;
    for (const auto& m : col) sum += m.total_core_reward;
    return col.empty() ? 0.0 : sum / static_cast<double>(col.size());
}

double EvaluationResult::success_rate(std::size_t policy) const {
    const auto& col = columns.at(policy);
    double wins = 0.0;
    for (const auto& m : col) wins += m.success ? 1.0 : 0.0;
    return col.empty() ? 0.0 : wins / static_cast<double>(col.size());
}

double EvaluationResult::mean_turns(std::size_t policy) const {
    const auto& col = columns.at(policy);
    double sum = 0.0;
    for (const auto& m : col) sum += m.turns;
    return col.empty() ? 0.0 : sum / static_cast<double>(col.size());
}

std::vector<std::vector<double>> EvaluationResult::reward_matrix() const {
    std::vector<std::vector<double>> m(episodes(), std::vector<double>(columns.size()));
    for (std::size_t j = 0; j < columns.size(); ++j) {
        for (std::size_t i = 0; i < columns[j].size(); ++i) m[i][j] = columns[j][i].total_core_reward;
    }
    return m;
}

EvaluationResult run_evaluation(std::shared_ptr<const ApiDataset> dataset,
                                std::span<const std::shared_ptr<const Policy>> policies, int episodes,
                                std::uint64_t base_seed, const SimulatorParams& simulator,
                                const SessionConfig& config, unsigned threads) {
    if (policies.empty()) throw ContractError("run_evaluation needs at least one policy");
    if (episodes < 1) throw ContractError("run_evaluation needs at least one episode");
    EvaluationResult result;
    result.base_seed = base_seed;
    const auto n = static_cast<std::size_t>(episodes);
    result.columns.assign(policies.size(), std::vector<EpisodeMetrics>(n));
    for (const auto& p : policies) result.policies.push_back(p->name());
    parallel_for(n * policies.size(), threads, [&](std::size_t job) {
        const std::size_t j = job / n;
        const std::size_t i = job % n;
        result.columns[j][i] = run_episode(dataset, policies[j], simulator, base_seed + i, config).metrics;
    });
    return result;
}

nlohmann::json evaluation_to_json(const EvaluationResult& r) {
    nlohmann::json j;
    j["base_seed"] = r.base_seed;
    j["episodes"] = r.episodes();
    for (std::size_t p = 0; p < r.policies.size(); ++p) {
        nlohmann::json entry = {{"policy", r.policies[p]},
                                {"mean_core_reward", r.mean_core_reward(p)},
                                {"success_rate", r.success_rate(p)},
                                {"mean_turns", r.mean_turns(p)}};
        auto& rewards = entry["rewards"] = nlohmann::json::array();
        for (const auto& m : r.columns[p]) rewards.push_back(m.total_core_reward);
        j["policies"].push_back(std::move(entry));
    }
    return j;
}

std::string evaluation_to_csv(const EvaluationResult& r) {
    std::ostringstream out;
    out.precision(17);
    out << "seed";
    for (const auto& name : r.policies) out << ',' << name << "_reward," << name << "_success," << name << "_turns";
    out << '\n';
    for (std::size_t i = 0; i < r.episodes(); ++i) {
        out << r.base_seed + i;
        for (const auto& col : r.columns) {
            out << ',' << col[i].total_core_reward << ',' << (col[i].success ? 1 : 0) << ',' << col[i].turns;
        }
        out << '\n';
    }
    return out.str();
}

long ComparisonResult::row_total(std::size_t a) const {
    long total = 0;
    for (long v : confusion.at(a)) total += v;
    return total;
}

long ComparisonResult::column_total(std::size_t b) const {
    long total = 0;
    for (const auto& row : confusion) total += row.at(b);
    return total;
}

ComparisonResult compare_policies(std::shared_ptr<const ApiDataset> dataset, std::shared_ptr<const Policy> policy_a,
                                  std::shared_ptr<const Policy> policy_b, int episodes, std::uint64_t seed,
                                  const SimulatorParams& simulator, const SessionConfig& config) {
    if (!policy_a || !policy_b) throw ContractError("compare_policies needs two policies");
    ComparisonResult result;
    for (int e = 0; e < episodes; ++e) {
        Episode episode(dataset, policy_a, simulator, config, seed + static_cast<std::uint64_t>(e));
        bool diverged = false;
        while (!episode.finished()) {
            const auto input = episode.session().policy_input();
            const ActType a = policy_a->decide(input);
            const ActType b = policy_b->decide(input);
            ++result.confusion[action_index(a)][action_index(b)];
            ++result.decisions;
            diverged = diverged || a != b;
            episode.step(a);
        }
        ++result.episodes;
        if (diverged) ++result.divergent_episodes;
    }
    return result;
}

std::string comparison_to_csv(const ComparisonResult& r) {
    std::ostringstream out;
    out << "policy_a\\policy_b";
    for (ActType b : kSelectableActs) out << ',' << act_name(b);
    out << ",total\n";
    for (std::size_t a = 0; a < kSelectableActCount; ++a) {
        out << act_name(kSelectableActs[a]);
        for (long v : r.confusion[a]) out << ',' << v;
        out << ',' << r.row_total(a) << '\n';
    }
    out << "total";
    for (std::size_t b = 0; b < kSelectableActCount; ++b) out << ',' << r.column_total(b);
    out << ',' << r.decisions << '\n';
    return out.str();
}

}  // namespace apidm
