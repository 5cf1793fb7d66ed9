#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "apidm/session.hpp"

namespace apidm {

/// Quick-response bubble: a label plus the identifier the client sends back.
struct QuickResponse {
    std::string id;
    std::string label;
    ActType act;
};

/// Identifiers accepted by parse_input in place of free text.
const std::vector<QuickResponse>& quick_responses();

/// "+word" -> provideKeyword, "@name" -> elicitInfoAllAPI, "@name#property" ->
/// elicitInfoAPI, a quick-response id -> its act, anything else -> provideQuery.
/// `last_shown` supplies the ids rejected by the "reject" quick response.
/// Unknown names throw NotFound with the closest ids.
DialogueAct parse_input(std::string_view text, const ApiDataset& dataset,
                        const std::optional<DialogueAct>& last_shown = std::nullopt);

struct RenderedMessage {
    std::string text;
    DialogueAct act;
    std::vector<QuickResponse> quick_responses;
    /// Component ids or keywords.
    std::vector<std::string> clickable_items;
    std::string clickable_kind;  // "components", "keywords" or empty
    /// Documentation shown with the message, in display order.
    std::vector<std::pair<std::string, std::string>> details;
};

RenderedMessage render(const DialogueAct& act, const ApiDataset& dataset);
nlohmann::json rendered_to_json(const RenderedMessage& m);

struct ServiceResponse {
    int status = 200;
    nlohmann::json body;
};

using PolicyFactory = std::function<std::shared_ptr<const Policy>()>;

struct ServiceOptions {
    std::map<std::string, std::shared_ptr<const ApiDataset>> corpora;
    std::map<std::string, PolicyFactory> policies;
    std::string default_corpus;
    std::string default_policy = "hand-crafted";
    SessionConfig session;
    std::uint64_t seed = 1;
};

/// Registers "single-turn" and "hand-crafted", plus "learned" when a checkpoint is given.
void register_standard_policies(ServiceOptions& options, const std::optional<std::string>& checkpoint = std::nullopt);

/// Transport-independent session API; the HTTP server forwards requests here.
///   POST   /sessions              {corpus?, policy?}      -> 201 {session_id, greeting}
///   POST   /sessions/{id}/acts    {text} | {act}          -> 200 {user_act, system, turn, total_core_reward}
///   GET    /sessions/{id}                                  -> 200 {transcript, ...}
///   POST   /sessions/{id}/restart                          -> 200 like /acts
///   DELETE /sessions/{id}                                  -> 200
///   GET    /corpora, GET /policies
class SessionService {
public:
    explicit SessionService(ServiceOptions options);

    ServiceResponse handle(std::string_view method, std::string_view path, std::string_view body);
    std::size_t session_count() const;

private:
    struct Handle {
        std::string id;
        std::string corpus;
        std::string policy;
        std::string created_at;
        std::mutex busy;
        Session session;

        Handle(std::string id_, std::string corpus_, std::string policy_, std::string created, Session s)
            : id(std::move(id_)), corpus(std::move(corpus_)), policy(std::move(policy_)),
              created_at(std::move(created)), session(std::move(s)) {}
    };

    ServiceResponse create(const nlohmann::json& body);
    ServiceResponse step(Handle& h, const nlohmann::json& body, bool restart);
    ServiceResponse describe(const Handle& h) const;
    std::shared_ptr<Handle> find(const std::string& id) const;

    ServiceOptions options_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Handle>> sessions_;
    std::uint64_t counter_ = 0;
};

}  // namespace apidm
