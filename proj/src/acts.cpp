#include "apidm/acts.hpp"

#include <algorithm>
#include <cctype>

#include "apidm/corpus.hpp"
#include "apidm/error.hpp"

namespace apidm {

std::size_t action_index(ActType t) {
    if (!is_selectable(t)) throw ContractError("act is not a selectable system act");
    return static_cast<std::size_t>(t) - 1;
}

ActType action_at(std::size_t index) {
    if (index >= kSelectableActCount) throw ContractError("action index out of range");
    return kSelectableActs[index];
}

std::string_view act_name(ActType t) {
    switch (t) {
        case ActType::Start: return "START";
        case ActType::RequestQuery: return "requestQuery";
        case ActType::SuggKeywords: return "suggKeywords";
        case ActType::SuggAPI: return "suggAPI";
        case ActType::SuggInfoAPI: return "suggInfoAPI";
        case ActType::InfoAPI: return "infoAPI";
        case ActType::InfoAllAPI: return "infoAllAPI";
        case ActType::ListResults: return "listResults";
        case ActType::SystemChangePage: return "changePage";
        case ActType::ProvideQuery: return "provideQuery";
        case ActType::ProvideKeyword: return "provideKeyword";
        case ActType::RejectKeywords: return "rejectKeywords";
        case ActType::RejectComponents: return "rejectComponents";
        case ActType::Unsure: return "unsure";
        case ActType::ElicitInfoAPI: return "elicitInfoAPI";
        case ActType::ElicitInfoAllAPI: return "elicitInfoAllAPI";
        case ActType::ElicitSuggAPI: return "elicitSuggAPI";
        case ActType::ElicitListResults: return "elicitListResults";
        case ActType::UserChangePage: return "changePage";
        case ActType::Restart: return "restart";
        case ActType::End: return "END";
    }
    return "?";
}

std::optional<ActType> parse_act_name(std::string_view name, bool user) {
    for (std::size_t i = 0; i < kActTypeCount; ++i) {
        const auto t = static_cast<ActType>(i);
        if (is_user_act(t) == user && act_name(t) == name) return t;
    }
    return std::nullopt;
}

bool is_standard_navigation(ActType user_act) { return paired_response(user_act).has_value(); }

std::optional<ActType> paired_response(ActType user_act) {
    switch (user_act) {
        case ActType::ElicitInfoAPI: return ActType::InfoAPI;
        case ActType::ElicitInfoAllAPI: return ActType::InfoAllAPI;
        case ActType::ElicitSuggAPI: return ActType::SuggAPI;
        case ActType::ElicitListResults: return ActType::ListResults;
        case ActType::UserChangePage: return ActType::SystemChangePage;
        default: return std::nullopt;
    }
}

std::optional<std::string> DialogueAct::component_id() const {
    if (auto* c = std::get_if<payload::Component>(&payload)) return c->id;
    if (auto* p = std::get_if<payload::Properties>(&payload)) return p->id;
    return std::nullopt;
}

std::vector<std::string> DialogueAct::component_ids() const {
    if (auto id = component_id()) return {*id};
    if (auto* c = std::get_if<payload::Components>(&payload)) return c->ids;
    if (auto* p = std::get_if<payload::Page>(&payload)) return p->ids;
    return {};
}

std::size_t expected_payload_index(ActType t) {
    switch (t) {
        case ActType::ProvideQuery: return 1;
        case ActType::ProvideKeyword: return 2;
        case ActType::SuggKeywords:
        case ActType::RejectKeywords: return 3;
        case ActType::SuggAPI:
        case ActType::SuggInfoAPI:
        case ActType::InfoAllAPI:
        case ActType::ElicitInfoAllAPI: return 4;
        case ActType::RejectComponents: return 5;
        case ActType::InfoAPI:
        case ActType::ElicitInfoAPI: return 6;
        case ActType::ListResults:
        case ActType::SystemChangePage: return 7;
        default: return 0;
    }
}

namespace {

bool blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

void require_component(const ApiDataset* dataset, const std::string& id, ActType t) {
    if (id.empty()) throw ContractError(std::string(act_name(t)) + ": empty component id");
    if (dataset && !dataset->find(id)) {
        throw ContractError(std::string(act_name(t)) + ": unknown component '" + id + "'");
    }
}

}  // namespace

void validate_act(const DialogueAct& act, const ApiDataset* dataset) {
    const std::string name(act_name(act.type));
    if (act.payload.index() != expected_payload_index(act.type)) {
        throw ContractError(name + ": payload does not match act type");
    }
    std::visit(
        [&](const auto& p) {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, payload::Query>) {
                if (blank(p.text)) throw ContractError(name + ": empty query");
            } else if constexpr (std::is_same_v<P, payload::Keyword>) {
                if (blank(p.term)) throw ContractError(name + ": empty keyword");
            } else if constexpr (std::is_same_v<P, payload::Keywords>) {
                if (p.terms.empty()) throw ContractError(name + ": no keywords");
                for (const auto& t : p.terms) {
                    if (blank(t)) throw ContractError(name + ": empty keyword");
                }
            } else if constexpr (std::is_same_v<P, payload::Component>) {
                require_component(dataset, p.id, act.type);
            } else if constexpr (std::is_same_v<P, payload::Components>) {
                if (p.ids.empty()) throw ContractError(name + ": no components");
                for (const auto& id : p.ids) require_component(dataset, id, act.type);
            } else if constexpr (std::is_same_v<P, payload::Properties>) {
                require_component(dataset, p.id, act.type);
                if (p.names.empty()) throw ContractError(name + ": no properties requested");
                if (dataset) {
                    const auto& component = dataset->component(*dataset->find(p.id));
                    for (const auto& prop : p.names) {
                        if (!component.property(prop)) {
                            throw ContractError(name + ": '" + p.id + "' has no property '" + prop + "'");
                        }
                    }
                }
            } else if constexpr (std::is_same_v<P, payload::Page>) {
                for (const auto& id : p.ids) require_component(dataset, id, act.type);
            }
        },
        act.payload);
}

nlohmann::json payload_to_json(const Payload& p) {
    return std::visit(
        [](const auto& v) -> nlohmann::json {
            using P = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<P, std::monostate>) {
                return nullptr;
            } else if constexpr (std::is_same_v<P, payload::Query>) {
                return {{"text", v.text}};
            } else if constexpr (std::is_same_v<P, payload::Keyword>) {
                return {{"keyword", v.term}};
            } else if constexpr (std::is_same_v<P, payload::Keywords>) {
                return {{"keywords", v.terms}};
            } else if constexpr (std::is_same_v<P, payload::Component>) {
                return {{"id", v.id}};
            } else if constexpr (std::is_same_v<P, payload::Components>) {
                return {{"ids", v.ids}};
            } else if constexpr (std::is_same_v<P, payload::Properties>) {
                return {{"id", v.id}, {"properties", v.names}};
            } else {
                return {{"items", v.ids}};
            }
        },
        p);
}

namespace {

template <class T>
T field(const nlohmann::json& j, const char* name, ActType t) {
    if (!j.is_object() || !j.contains(name)) {
        throw ContractError(std::string(act_name(t)) + ": payload needs field '" + name + "'");
    }
    try {
        return j.at(name).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ContractError(std::string(act_name(t)) + ": payload field '" + name + "' has the wrong type");
    }
}

}  // namespace

Payload payload_from_json(ActType t, const nlohmann::json& j) {
    using Strings = std::vector<std::string>;
    switch (expected_payload_index(t)) {
        case 1: return payload::Query{field<std::string>(j, "text", t)};
        case 2: return payload::Keyword{field<std::string>(j, "keyword", t)};
        case 3: return payload::Keywords{field<Strings>(j, "keywords", t)};
        case 4: return payload::Component{field<std::string>(j, "id", t)};
        case 5: return payload::Components{field<Strings>(j, "ids", t)};
        case 6: return payload::Properties{field<std::string>(j, "id", t), field<Strings>(j, "properties", t)};
        case 7: return payload::Page{field<Strings>(j, "items", t)};
        default: return std::monostate{};
    }
}

nlohmann::json act_to_json(const DialogueAct& act) {
    return {{"actor", is_user_act(act.type) ? "user" : "system"},
            {"act_type", act_name(act.type)},
            {"payload", payload_to_json(act.payload)}};
}

DialogueAct act_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("act_type") || !j.at("act_type").is_string()) {
        throw ContractError("act: missing string field 'act_type'");
    }
    bool user = true;
    if (j.contains("actor")) {
        if (!j.at("actor").is_string()) throw ContractError("act: field 'actor' must be a string");
        const auto actor = j.at("actor").get<std::string>();
        if (actor != "user" && actor != "system") throw ContractError("act: unknown actor '" + actor + "'");
        user = actor == "user";
    }
    const auto name = j.at("act_type").get<std::string>();
    auto type = parse_act_name(name, user);
    if (!type) throw ContractError("act: unknown " + std::string(user ? "user" : "system") + " act '" + name + "'");
    const nlohmann::json empty;
    DialogueAct act{*type, payload_from_json(*type, j.contains("payload") ? j.at("payload") : empty)};
    return act;
}

}  // namespace apidm
