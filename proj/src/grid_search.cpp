#include <algorithm>

#include "apidm/error.hpp"
#include "apidm/harness.hpp"
#include "apidm/policies.hpp"

namespace apidm {

ThresholdGrid ThresholdGrid::defaults() {
    ThresholdGrid g;
    g.t_query = {0.0, 0.05, 0.10};
    g.t_keywords = {0.05, 0.10, 0.15};
    g.t_sugg = {0.10, 0.15, 0.20};
    g.t_info = {0.30, 0.40, 0.50};
    return g;
}

std::vector<HandCraftedConfig> ThresholdGrid::cells() const {
    std::vector<HandCraftedConfig> out;
    for (double q : t_query) {
        for (double k : t_keywords) {
            for (double s : t_sugg) {
                for (double i : t_info) {
                    if (q < 0.0 || !(q <= k && k <= s && s <= i) || i > 1.0) continue;
                    out.push_back({q, k, s, i, unsure_window});
                }
            }
        }
    }
    return out;
}

std::size_t ThresholdGrid::skipped() const {
    return t_query.size() * t_keywords.size() * t_sugg.size() * t_info.size() - cells().size();
}

void to_json(nlohmann::json& j, const ThresholdGrid& g) {
    j = {{"t_query", g.t_query},
         {"t_keywords", g.t_keywords},
         {"t_sugg", g.t_sugg},
         {"t_info", g.t_info},
         {"unsure_window", g.unsure_window}};
}

void from_json(const nlohmann::json& j, ThresholdGrid& g) {
    const auto d = ThresholdGrid::defaults();
    g.t_query = j.value("t_query", d.t_query);
    g.t_keywords = j.value("t_keywords", d.t_keywords);
    g.t_sugg = j.value("t_sugg", d.t_sugg);
    g.t_info = j.value("t_info", d.t_info);
    g.unsure_window = j.value("unsure_window", d.unsure_window);
}

nlohmann::json grid_result_to_json(const GridSearchResult& r) {
    nlohmann::json j;
    j["best"] = r.best;
    j["best_mean_core_reward"] = r.best_mean_core_reward;
    j["skipped_cells"] = r.skipped_cells;
    j["cells"] = nlohmann::json::array();
    for (const auto& c : r.cells) {
        j["cells"].push_back(
            {{"config", c.config}, {"mean_core_reward", c.mean_core_reward}, {"success_rate", c.success_rate}});
    }
    return j;
}

GridSearchResult grid_search(const ThresholdGrid& grid, std::shared_ptr<const ApiDataset> dataset,
                             const SimulatorParams& simulator, int episodes_per_cell, std::uint64_t seed,
                             const SessionConfig& session, unsigned threads) {
    if (episodes_per_cell < 1) throw ConfigError("episodes_per_cell must be >= 1");
    const auto configs = grid.cells();
    if (configs.empty()) throw ConfigError("threshold grid has no valid cells");

    GridSearchResult result;
    result.skipped_cells = grid.skipped();
    result.cells.resize(configs.size());
    const auto n = static_cast<std::size_t>(episodes_per_cell);
    std::vector<std::vector<EpisodeMetrics>> metrics(configs.size(), std::vector<EpisodeMetrics>(n));
    std::vector<std::shared_ptr<const Policy>> policies;
    for (const auto& c : configs) policies.push_back(std::make_shared<HandCraftedPolicy>(c));

    parallel_for(configs.size() * n, threads, [&](std::size_t job) {
        const std::size_t c = job / n;
        const std::size_t i = job % n;
        metrics[c][i] = run_episode(dataset, policies[c], simulator, seed + i, session).metrics;
    });

    for (std::size_t c = 0; c < configs.size(); ++c) {
        double reward = 0.0;
        double wins = 0.0;
        for (const auto& m : metrics[c]) {
            reward += m.total_core_reward;
            wins += m.success ? 1.0 : 0.0;
        }
        result.cells[c] = {configs[c], reward / static_cast<double>(n), wins / static_cast<double>(n)};
    }

    auto better = [](const GridCell& a, const GridCell& b) {
        if (a.mean_core_reward != b.mean_core_reward) return a.mean_core_reward > b.mean_core_reward;
        if (a.config.t_info != b.config.t_info) return a.config.t_info < b.config.t_info;
        return a.config.t_sugg < b.config.t_sugg;
    };
    const GridCell* best = &result.cells.front();
    for (const auto& c : result.cells) {
        if (better(c, *best)) best = &c;
    }
    result.best = best->config;
    result.best_mean_core_reward = best->mean_core_reward;
    return result;
}

}  // namespace apidm
