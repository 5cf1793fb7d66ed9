#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace apidm {

class ApiDataset;

/// Every dialogue act type. System acts come first; the first nine values
/// (START plus the eight selectable acts) are contiguous so they can index
/// one-hot encodings and Q-value outputs directly.
enum class ActType : std::uint8_t {
    // system
    Start,
    RequestQuery,
    SuggKeywords,
    SuggAPI,
    SuggInfoAPI,
    InfoAPI,
    InfoAllAPI,
    ListResults,
    SystemChangePage,
    // user
    ProvideQuery,
    ProvideKeyword,
    RejectKeywords,
    RejectComponents,
    Unsure,
    ElicitInfoAPI,
    ElicitInfoAllAPI,
    ElicitSuggAPI,
    ElicitListResults,
    UserChangePage,
    Restart,
    End,
};

inline constexpr std::size_t kActTypeCount = 21;
inline constexpr std::size_t kSelectableActCount = 8;

/// The eight system acts a policy may choose, in action-index order.
inline constexpr std::array<ActType, kSelectableActCount> kSelectableActs = {
    ActType::RequestQuery, ActType::SuggKeywords, ActType::SuggAPI,     ActType::SuggInfoAPI,
    ActType::InfoAPI,      ActType::InfoAllAPI,   ActType::ListResults, ActType::SystemChangePage};

/// User acts in the action-space table (restart comes from the study tool).
inline constexpr std::array<ActType, 12> kUserActs = {
    ActType::ProvideQuery,     ActType::ProvideKeyword,    ActType::RejectKeywords,
    ActType::RejectComponents, ActType::Unsure,            ActType::ElicitInfoAPI,
    ActType::ElicitInfoAllAPI, ActType::ElicitSuggAPI,     ActType::ElicitListResults,
    ActType::UserChangePage,   ActType::Restart,           ActType::End};

constexpr bool is_system_act(ActType t) { return t <= ActType::SystemChangePage; }
constexpr bool is_user_act(ActType t) { return !is_system_act(t); }
constexpr bool is_selectable(ActType t) { return is_system_act(t) && t != ActType::Start; }

/// Position within kSelectableActs; requires is_selectable(t).
std::size_t action_index(ActType t);
ActType action_at(std::size_t index);

/// Canonical camelCase name; both changePage acts share the name "changePage".
std::string_view act_name(ActType t);
/// Parses a canonical name for the given speaker.
std::optional<ActType> parse_act_name(std::string_view name, bool user);

bool is_standard_navigation(ActType user_act);
/// System act obligated by a standard-navigation user act.
std::optional<ActType> paired_response(ActType user_act);

namespace payload {
struct Query {
    std::string text;
    bool operator==(const Query&) const = default;
};
struct Keyword {
    std::string term;
    bool operator==(const Keyword&) const = default;
};
struct Keywords {
    std::vector<std::string> terms;
    bool operator==(const Keywords&) const = default;
};
struct Component {
    std::string id;
    bool operator==(const Component&) const = default;
};
struct Components {
    std::vector<std::string> ids;
    bool operator==(const Components&) const = default;
};
/// One component plus the property names requested or presented.
struct Properties {
    std::string id;
    std::vector<std::string> names;
    bool operator==(const Properties&) const = default;
};
struct Page {
    std::vector<std::string> ids;
    bool operator==(const Page&) const = default;
};
}  // namespace payload

using Payload = std::variant<std::monostate, payload::Query, payload::Keyword, payload::Keywords,
                             payload::Component, payload::Components, payload::Properties,
                             payload::Page>;

struct DialogueAct {
    ActType type = ActType::Start;
    Payload payload;

    bool operator==(const DialogueAct&) const = default;

    static DialogueAct start() { return {ActType::Start, {}}; }
    static DialogueAct query(std::string text) { return {ActType::ProvideQuery, payload::Query{std::move(text)}}; }
    static DialogueAct keyword(std::string term) {
        return {ActType::ProvideKeyword, payload::Keyword{std::move(term)}};
    }
    static DialogueAct simple(ActType t) { return {t, {}}; }

    /// Component id carried by the payload, if any single one.
    std::optional<std::string> component_id() const;
    /// All component ids shown or referenced by the payload.
    std::vector<std::string> component_ids() const;
};

/// Index of the payload alternative every act type must carry.
std::size_t expected_payload_index(ActType t);

/// Throws ContractError when the payload does not match the type, or refers to
/// components/properties missing from `dataset` (when given).
void validate_act(const DialogueAct& act, const ApiDataset* dataset = nullptr);

nlohmann::json payload_to_json(const Payload& p);
Payload payload_from_json(ActType t, const nlohmann::json& j);
nlohmann::json act_to_json(const DialogueAct& act);
/// Expects {"act_type": name, "actor": "user"|"system", "payload": {...}}.
DialogueAct act_from_json(const nlohmann::json& j);

}  // namespace apidm
