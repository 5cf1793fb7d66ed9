#include "apidm/policies.hpp"

#include "apidm/error.hpp"

namespace apidm {

ActType single_turn_decide(const DialogueState& state) {
    if (state.last_user_act) {
        if (auto paired = paired_response(*state.last_user_act)) return *paired;
    }
    return ActType::ListResults;
}

void HandCraftedConfig::validate() const {
    if (!(0.0 <= t_query && t_query <= t_keywords && t_keywords <= t_sugg && t_sugg <= t_info && t_info <= 1.0)) {
        throw ConfigError("hand-crafted thresholds must satisfy 0 <= t_query <= t_keywords <= t_sugg <= t_info <= 1");
    }
    if (unsure_window < 0) throw ConfigError("unsure_window must be >= 0");
}

void to_json(nlohmann::json& j, const HandCraftedConfig& c) {
    j = {{"t_query", c.t_query},
         {"t_keywords", c.t_keywords},
         {"t_sugg", c.t_sugg},
         {"t_info", c.t_info},
         {"unsure_window", c.unsure_window}};
}

void from_json(const nlohmann::json& j, HandCraftedConfig& c) {
    const HandCraftedConfig d;
    c.t_query = j.value("t_query", d.t_query);
    c.t_keywords = j.value("t_keywords", d.t_keywords);
    c.t_sugg = j.value("t_sugg", d.t_sugg);
    c.t_info = j.value("t_info", d.t_info);
    c.unsure_window = j.value("unsure_window", d.unsure_window);
    c.validate();
}

ActType hand_crafted_decide(const DialogueState& state, const HandCraftedConfig& cfg) {
    if (state.last_user_act) {
        if (auto paired = paired_response(*state.last_user_act)) return *paired;
        if (*state.last_user_act == ActType::Unsure) return ActType::ListResults;
    }
    const double s = state.top_score();
    const bool recently_unsure = state.unsure_recency <= cfg.unsure_window;
    if (!recently_unsure) {
        if (s < cfg.t_query) return ActType::RequestQuery;
        if (s < cfg.t_keywords) return ActType::SuggKeywords;
    }
    if (s >= cfg.t_info) return ActType::SuggInfoAPI;
    if (s >= cfg.t_sugg) return ActType::SuggAPI;
    return ActType::ListResults;
}

}  // namespace apidm
