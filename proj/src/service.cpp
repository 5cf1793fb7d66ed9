#include "apidm/service.hpp"

#include <algorithm>
#include <cctype>
#include <ctime>
#include <iomanip>
#include <sstream>

#include "apidm/dqn.hpp"
#include "apidm/error.hpp"
#include "apidm/policies.hpp"
#include "apidm/text.hpp"

namespace apidm {

const std::vector<QuickResponse>& quick_responses() {
    static const std::vector<QuickResponse> all = {
        {"list-results", "List results", ActType::ElicitListResults},
        {"next-function", "Next function", ActType::ElicitSuggAPI},
        {"next-page", "Next page", ActType::UserChangePage},
        {"reject", "None of these", ActType::RejectComponents},
        {"restart", "Restart", ActType::Restart},
    };
    return all;
}

namespace {

std::string trim(std::string_view s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos) return {};
    auto end = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(begin, end - begin + 1));
}

const QuickResponse& quick(std::string_view id) {
    for (const auto& q : quick_responses()) {
        if (q.id == id) return q;
    }
    throw ContractError("unknown quick response '" + std::string(id) + "'");
}

std::vector<std::string> nearest_ids(const ApiDataset& dataset, std::string_view name, std::size_t count) {
    std::vector<std::pair<std::size_t, std::string>> scored;
    for (const auto& c : dataset.components()) scored.emplace_back(edit_distance(name, c.id), c.id);
    std::sort(scored.begin(), scored.end());
    std::vector<std::string> out;
    for (std::size_t i = 0; i < scored.size() && i < count; ++i) out.push_back(scored[i].second);
    return out;
}

}  // namespace

DialogueAct parse_input(std::string_view text, const ApiDataset& dataset, const std::optional<DialogueAct>& last_shown) {
    const std::string input = trim(text);
    if (input.empty()) throw ContractError("empty input");

    for (const auto& q : quick_responses()) {
        if (q.id != input) continue;
        if (q.act == ActType::RejectComponents) {
            std::vector<std::string> ids;
            if (last_shown) ids = last_shown->component_ids();
            if (ids.empty()) throw ContractError("reject: the last message showed no functions");
            return {q.act, payload::Components{std::move(ids)}};
        }
        return DialogueAct::simple(q.act);
    }

    if (input.front() == '+') {
        const std::string term = trim(std::string_view(input).substr(1));
        if (term.empty()) throw ContractError("'+' needs a keyword");
        if (term.find_first_of(" \t") != std::string::npos) throw ContractError("'+' takes a single keyword");
        std::string lowered = term;
        std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        return DialogueAct::keyword(lowered);
    }

    if (input.front() == '@') {
        std::string name = trim(std::string_view(input).substr(1));
        std::optional<std::string> property;
        if (auto hash = name.find('#'); hash != std::string::npos) {
            property = trim(std::string_view(name).substr(hash + 1));
            name = trim(std::string_view(name).substr(0, hash));
        }
        if (name.empty()) throw ContractError("'@' needs a function name");
        const auto index = dataset.find(name);
        if (!index) throw NotFound("no function named '" + name + "'", nearest_ids(dataset, name, 3));
        if (!property) return {ActType::ElicitInfoAllAPI, payload::Component{name}};
        const auto& component = dataset.component(*index);
        if (property->empty() || !component.property(*property)) {
            throw NotFound("'" + name + "' has no property '" + *property + "'", component.property_names());
        }
        return {ActType::ElicitInfoAPI, payload::Properties{name, {*property}}};
    }

    return DialogueAct::query(input);
}

namespace {

std::string join(const std::vector<std::string>& items, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

void add_documentation(RenderedMessage& m, const ApiComponent& c, const std::vector<std::string>& names) {
    for (const auto& name : names) {
        if (auto value = c.property(name)) m.details.emplace_back(name, *value);
    }
}

std::vector<QuickResponse> bubbles(std::initializer_list<std::string_view> ids) {
    std::vector<QuickResponse> out;
    for (auto id : ids) out.push_back(quick(id));
    return out;
}

}  // namespace

RenderedMessage render(const DialogueAct& act, const ApiDataset& dataset) {
    if (!is_system_act(act.type)) throw ContractError("render expects a system act");
    RenderedMessage m;
    m.act = act;
    auto component = [&](const std::string& id) -> const ApiComponent& {
        const auto index = dataset.find(id);
        if (!index) throw ContractError("render: unknown component '" + id + "'");
        return dataset.component(*index);
    };
    switch (act.type) {
        case ActType::Start:
            m.text = "Hi! Describe the function you are looking for. Type +word to require a keyword, "
                     "or @name to read a function's documentation.";
            m.quick_responses = bubbles({"list-results"});
            break;
        case ActType::RequestQuery:
            m.text = "Could you describe what you want to do in different words?";
            m.quick_responses = bubbles({"list-results", "restart"});
            break;
        case ActType::SuggKeywords: {
            const auto& terms = std::get<payload::Keywords>(act.payload).terms;
            m.text = "Do any of these keywords describe what you need? " + join(terms, ", ");
            m.clickable_items = terms;
            m.clickable_kind = "keywords";
            m.quick_responses = bubbles({"list-results", "restart"});
            break;
        }
        case ActType::SuggAPI: {
            const auto& id = std::get<payload::Component>(act.payload).id;
            m.text = "Maybe " + id + " is the function you need?";
            add_documentation(m, component(id), {"signature", "summary"});
            m.clickable_items = {id};
            m.clickable_kind = "components";
            m.quick_responses = bubbles({"next-function", "list-results", "reject", "restart"});
            break;
        }
        case ActType::SuggInfoAPI: {
            const auto& id = std::get<payload::Component>(act.payload).id;
            const auto& c = component(id);
            m.text = "I think " + id + " is a good match. Here is its documentation.";
            add_documentation(m, c, c.property_names());
            m.clickable_items = {id};
            m.clickable_kind = "components";
            m.quick_responses = bubbles({"next-function", "list-results", "reject", "restart"});
            break;
        }
        case ActType::InfoAPI: {
            const auto& p = std::get<payload::Properties>(act.payload);
            m.text = "Here is the " + join(p.names, " and ") + " of " + p.id + ".";
            add_documentation(m, component(p.id), p.names);
            m.clickable_items = {p.id};
            m.clickable_kind = "components";
            m.quick_responses = bubbles({"list-results", "next-function", "restart"});
            break;
        }
        case ActType::InfoAllAPI: {
            const auto& id = std::get<payload::Component>(act.payload).id;
            const auto& c = component(id);
            m.text = "Here is everything documented for " + id + ".";
            add_documentation(m, c, c.property_names());
            m.clickable_items = {id};
            m.clickable_kind = "components";
            m.quick_responses = bubbles({"list-results", "next-function", "restart"});
            break;
        }
        case ActType::ListResults:
        case ActType::SystemChangePage: {
            const auto& ids = std::get<payload::Page>(act.payload).ids;
            m.text = act.type == ActType::ListResults
                         ? "I found these functions. Would you like to know more about any of them?"
                         : "Here are some more functions. Would you like to know more about any of them?";
            m.clickable_items = ids;
            m.clickable_kind = "components";
            m.quick_responses = bubbles({"next-page", "next-function", "reject", "restart"});
            break;
        }
        default:
            break;
    }
    return m;
}

nlohmann::json rendered_to_json(const RenderedMessage& m) {
    nlohmann::json quick = nlohmann::json::array();
    for (const auto& q : m.quick_responses) {
        quick.push_back({{"id", q.id}, {"label", q.label}, {"act_type", act_name(q.act)}});
    }
    nlohmann::json details = nlohmann::json::array();
    for (const auto& [name, value] : m.details) details.push_back({{"name", name}, {"value", value}});
    return {{"text", m.text},
            {"act", act_to_json(m.act)},
            {"quick_responses", quick},
            {"clickable_items", m.clickable_items},
            {"clickable_kind", m.clickable_kind},
            {"details", details}};
}

void register_standard_policies(ServiceOptions& options, const std::optional<std::string>& checkpoint) {
    auto single = std::make_shared<const SingleTurnPolicy>();
    auto hand = std::make_shared<const HandCraftedPolicy>();
    options.policies["single-turn"] = [single] { return single; };
    options.policies["hand-crafted"] = [hand] { return hand; };
    if (checkpoint) {
        auto net = std::make_shared<const QNetwork>(load_checkpoint(*checkpoint).net);
        auto learned = std::make_shared<const LearnedPolicy>(net);
        options.policies["learned"] = [learned] { return learned; };
    }
}

namespace {

ServiceResponse error(int status, std::string code, std::string message, nlohmann::json extra = nlohmann::json::object()) {
    extra["error"] = std::move(message);
    extra["code"] = std::move(code);
    return {status, std::move(extra)};
}

std::vector<std::string> split_path(std::string_view path) {
    if (auto q = path.find('?'); q != std::string_view::npos) path = path.substr(0, q);
    std::vector<std::string> parts;
    std::size_t i = 0;
    while (i < path.size()) {
        while (i < path.size() && path[i] == '/') ++i;
        std::size_t j = i;
        while (j < path.size() && path[j] != '/') ++j;
        if (j > i) parts.emplace_back(path.substr(i, j - i));
        i = j;
    }
    return parts;
}

std::string now_iso8601() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

std::optional<DialogueAct> last_system_message(const Session& s) {
    const auto& t = s.transcript();
    for (auto it = t.rbegin(); it != t.rend(); ++it) {
        if (it->actor == Actor::System) return it->act;
    }
    return std::nullopt;
}

}  // namespace

SessionService::SessionService(ServiceOptions options) : options_(std::move(options)) {
    if (options_.corpora.empty()) throw ConfigError("service needs at least one corpus");
    if (options_.default_corpus.empty()) options_.default_corpus = options_.corpora.begin()->first;
    if (!options_.corpora.contains(options_.default_corpus)) throw ConfigError("unknown default corpus");
    if (options_.policies.empty()) register_standard_policies(options_);
    options_.session.validate();
}

std::size_t SessionService::session_count() const {
    std::lock_guard lock(mutex_);
    return sessions_.size();
}

std::shared_ptr<SessionService::Handle> SessionService::find(const std::string& id) const {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
}

ServiceResponse SessionService::handle(std::string_view method, std::string_view path, std::string_view body) {
    nlohmann::json json = nlohmann::json::object();
    if (method == "POST" && !trim(body).empty()) {
        json = nlohmann::json::parse(body, nullptr, false);
        if (json.is_discarded()) return error(400, "malformed_body", "request body is not valid JSON");
        if (!json.is_object()) return error(400, "malformed_body", "request body must be a JSON object");
    }
    const auto parts = split_path(path);
    try {
        if (parts.size() == 1 && parts[0] == "corpora" && method == "GET") {
            nlohmann::json list = nlohmann::json::array();
            for (const auto& [name, d] : options_.corpora) list.push_back({{"name", name}, {"api", d->api()}, {"size", d->size()}});
            return {200, {{"corpora", list}, {"default", options_.default_corpus}}};
        }
        if (parts.size() == 1 && parts[0] == "policies" && method == "GET") {
            nlohmann::json list = nlohmann::json::array();
            for (const auto& [name, f] : options_.policies) list.push_back(name);
            return {200, {{"policies", list}, {"default", options_.default_policy}}};
        }
        if (parts.empty() || parts[0] != "sessions") return error(404, "unknown_route", "no such endpoint");
        if (parts.size() == 1) {
            if (method == "POST") return create(json);
            return error(405, "method_not_allowed", "use POST /sessions");
        }
        if (parts.size() > 3) return error(404, "unknown_route", "no such endpoint");
        auto h = find(parts[1]);
        if (!h) return error(404, "unknown_session", "no session '" + parts[1] + "'");

        if (parts.size() == 2) {
            if (method == "GET") {
                std::unique_lock lock(h->busy, std::try_to_lock);
                if (!lock) return error(409, "busy", "session is processing another request");
                return describe(*h);
            }
            if (method == "DELETE") {
                std::unique_lock lock(h->busy, std::try_to_lock);
                if (!lock) return error(409, "busy", "session is processing another request");
                std::lock_guard guard(mutex_);
                sessions_.erase(parts[1]);
                return {200, {{"deleted", parts[1]}}};
            }
            return error(405, "method_not_allowed", "use GET or DELETE");
        }
        if (method != "POST") return error(405, "method_not_allowed", "use POST");
        if (parts[2] != "acts" && parts[2] != "restart") return error(404, "unknown_route", "no such endpoint");
        std::unique_lock lock(h->busy, std::try_to_lock);
        if (!lock) return error(409, "busy", "session is processing another request");
        return step(*h, json, parts[2] == "restart");
    } catch (const NotFound& e) {
        return error(404, "unknown_component", e.what(), {{"suggestions", e.suggestions()}});
    } catch (const ContractError& e) {
        return error(400, "invalid_act", e.what());
    } catch (const ConfigError& e) {
        return error(400, "invalid_request", e.what());
    }
}

ServiceResponse SessionService::create(const nlohmann::json& body) {
    std::string corpus = options_.default_corpus;
    std::string policy = options_.default_policy;
    if (body.contains("corpus")) {
        if (!body["corpus"].is_string()) return error(400, "malformed_body", "field 'corpus' must be a string", {{"field", "corpus"}});
        corpus = body["corpus"].get<std::string>();
    }
    if (body.contains("policy")) {
        if (!body["policy"].is_string()) return error(400, "malformed_body", "field 'policy' must be a string", {{"field", "policy"}});
        policy = body["policy"].get<std::string>();
    }
    auto dataset = options_.corpora.find(corpus);
    if (dataset == options_.corpora.end()) {
        return error(404, "unknown_corpus", "no corpus named '" + corpus + "'", {{"field", "corpus"}});
    }
    auto factory = options_.policies.find(policy);
    if (factory == options_.policies.end()) {
        return error(404, "unknown_policy", "no policy named '" + policy + "'", {{"field", "policy"}});
    }

    std::shared_ptr<Handle> h;
    {
        std::lock_guard lock(mutex_);
        const std::uint64_t n = ++counter_;
        const std::uint64_t seed = mix_seed(options_.seed, n);
        std::ostringstream id;
        id << std::hex << std::setw(16) << std::setfill('0') << mix_seed(seed, 0) << '-' << n;
        h = std::make_shared<Handle>(id.str(), corpus, policy, now_iso8601(),
                                     Session(dataset->second, factory->second(), options_.session, seed));
        sessions_[h->id] = h;
    }
    const auto& start = h->session.transcript().front().act;
    return {201,
            {{"session_id", h->id},
             {"corpus", corpus},
             {"policy", policy},
             {"greeting", rendered_to_json(render(start, h->session.dataset()))}}};
}

ServiceResponse SessionService::step(Handle& h, const nlohmann::json& body, bool restart) {
    auto& session = h.session;
    if (session.terminal()) return error(409, "session_over", "the dialogue has ended");

    DialogueAct act;
    if (restart) {
        act = DialogueAct::simple(ActType::Restart);
    } else if (body.contains("text")) {
        if (!body["text"].is_string()) return error(400, "malformed_body", "field 'text' must be a string", {{"field", "text"}});
        act = parse_input(body["text"].get<std::string>(), session.dataset(), last_system_message(session));
    } else if (body.contains("act")) {
        nlohmann::json wire = body["act"];
        if (!wire.is_object()) return error(400, "malformed_body", "field 'act' must be an object", {{"field", "act"}});
        if (!wire.contains("actor")) wire["actor"] = "user";
        act = act_from_json(wire);
        if (!is_user_act(act.type)) return error(400, "invalid_act", "only user acts can be sent", {{"field", "act"}});
    } else {
        return error(400, "malformed_body", "body needs 'text' or 'act'", {{"field", "text"}});
    }

    session.apply_user_act(act);
    nlohmann::json system = nullptr;
    if (session.awaiting_response()) system = rendered_to_json(render(session.system_respond(), session.dataset()));
    return {200,
            {{"user_act", act_to_json(act)},
             {"system", system},
             {"turn", session.state().turn_count},
             {"top_score", session.state().top_score()},
             {"total_core_reward", session.total_core_reward()},
             {"terminal", session.terminal()}}};
}

ServiceResponse SessionService::describe(const Handle& h) const {
    nlohmann::json transcript = nlohmann::json::array();
    for (const auto& e : h.session.transcript()) transcript.push_back(transcript_entry_to_json(e));
    return {200,
            {{"session_id", h.id},
             {"corpus", h.corpus},
             {"policy", h.policy},
             {"created_at", h.created_at},
             {"seed", h.session.seed()},
             {"config", h.session.config()},
             {"turn", h.session.state().turn_count},
             {"terminal", h.session.terminal()},
             {"total_core_reward", h.session.total_core_reward()},
             {"transcript", transcript}}};
}

}  // namespace apidm
