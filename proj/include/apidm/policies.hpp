#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "apidm/session.hpp"
#include "apidm/usersim.hpp"

namespace apidm {

/// Standard navigation gets its paired act; everything else lists the top N.
ActType single_turn_decide(const DialogueState& state);

class SingleTurnPolicy final : public Policy {
public:
    std::string name() const override { return "single-turn"; }
    ActType decide(const PolicyInput& input) const override { return single_turn_decide(input.state); }
};

/// Thresholds on the top similarity score s.
struct HandCraftedConfig {
    double t_query = 0.05;     // below: requestQuery
    double t_keywords = 0.10;  // below: suggKeywords
    double t_sugg = 0.20;      // at or above: suggAPI
    double t_info = 0.50;      // at or above: suggInfoAPI
    int unsure_window = 3;     // user turns after an unsure act with no refinement prompts

    void validate() const;
    bool operator==(const HandCraftedConfig&) const = default;
};

void to_json(nlohmann::json& j, const HandCraftedConfig& c);
void from_json(const nlohmann::json& j, HandCraftedConfig& c);

ActType hand_crafted_decide(const DialogueState& state, const HandCraftedConfig& cfg);

class HandCraftedPolicy final : public Policy {
public:
    explicit HandCraftedPolicy(HandCraftedConfig cfg = {}) : cfg_(cfg) { cfg_.validate(); }
    std::string name() const override { return "hand-crafted"; }
    ActType decide(const PolicyInput& input) const override { return hand_crafted_decide(input.state, cfg_); }
    const HandCraftedConfig& config() const { return cfg_; }

private:
    HandCraftedConfig cfg_;
};

struct ThresholdGrid {
    std::vector<double> t_query;
    std::vector<double> t_keywords;
    std::vector<double> t_sugg;
    std::vector<double> t_info;
    int unsure_window = 3;

    /// {0,.05,.1} x {.05,.1,.15} x {.1,.15,.2} x {.3,.4,.5}.
    static ThresholdGrid defaults();
    /// Cells that satisfy t_query <= t_keywords <= t_sugg <= t_info, in lexicographic order.
    std::vector<HandCraftedConfig> cells() const;
    /// Number of cells dropped for violating the ordering.
    std::size_t skipped() const;
};

void to_json(nlohmann::json& j, const ThresholdGrid& g);
void from_json(const nlohmann::json& j, ThresholdGrid& g);

struct GridCell {
    HandCraftedConfig config;
    double mean_core_reward = 0.0;
    double success_rate = 0.0;
};

struct GridSearchResult {
    HandCraftedConfig best;
    double best_mean_core_reward = 0.0;
    std::vector<GridCell> cells;
    std::size_t skipped_cells = 0;
};

nlohmann::json grid_result_to_json(const GridSearchResult& r);

/// Evaluates every valid cell on the same episode seeds (seed, seed+1, ...) and
/// returns the cell with the highest mean core reward; ties go to the smaller
/// t_info, then the smaller t_sugg.
GridSearchResult grid_search(const ThresholdGrid& grid, std::shared_ptr<const ApiDataset> dataset,
                             const SimulatorParams& simulator, int episodes_per_cell, std::uint64_t seed,
                             const SessionConfig& session = {}, unsigned threads = 0);

}  // namespace apidm
