#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "apidm/episode.hpp"

namespace apidm {

struct EpisodeResult {
    EpisodeMetrics metrics;
    std::vector<TranscriptEntry> transcript;
};

EpisodeResult run_episode(std::shared_ptr<const ApiDataset> dataset, std::shared_ptr<const Policy> policy,
                          const SimulatorParams& simulator, std::uint64_t seed, const SessionConfig& config = {});

/// Paired evaluation: episode i uses seed base_seed + i under every policy.
struct EvaluationResult {
    std::vector<std::string> policies;
    std::uint64_t base_seed = 0;
    /// columns[j][i]: policy j, episode i.
    std::vector<std::vector<EpisodeMetrics>> columns;

    std::size_t episodes() const { return columns.empty() ? 0 : columns.front().size(); }
    double mean_core_reward(std::size_t policy) const;
    double success_rate(std::size_t policy) const;
    double mean_turns(std::size_t policy) const;
    /// n x k matrix of total core rewards (rows are episodes).
    std::vector<std::vector<double>> reward_matrix() const;
};

EvaluationResult run_evaluation(std::shared_ptr<const ApiDataset> dataset,
                                std::span<const std::shared_ptr<const Policy>> policies, int episodes,
                                std::uint64_t base_seed, const SimulatorParams& simulator,
                                const SessionConfig& config = {}, unsigned threads = 0);

nlohmann::json evaluation_to_json(const EvaluationResult& r);
/// seed,<policy>_reward,<policy>_success,<policy>_turns,... one row per episode.
std::string evaluation_to_csv(const EvaluationResult& r);

/// Actions of policy_a (rows, drives the dialogue) against the shadow choices
/// of policy_b (columns) on the same states.
struct ComparisonResult {
    std::array<std::array<long, kSelectableActCount>, kSelectableActCount> confusion{};
    long decisions = 0;
    int episodes = 0;
    int divergent_episodes = 0;

    double divergence_rate() const { return episodes == 0 ? 0.0 : static_cast<double>(divergent_episodes) / episodes; }
    long row_total(std::size_t a) const;
    long column_total(std::size_t b) const;
};

ComparisonResult compare_policies(std::shared_ptr<const ApiDataset> dataset, std::shared_ptr<const Policy> policy_a,
                                  std::shared_ptr<const Policy> policy_b, int episodes, std::uint64_t seed,
                                  const SimulatorParams& simulator, const SessionConfig& config = {});

std::string comparison_to_csv(const ComparisonResult& r);

/// Runs `work(i)` for i in [0, count) on up to `threads` workers (0 = hardware).
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& work);

}  // namespace apidm
