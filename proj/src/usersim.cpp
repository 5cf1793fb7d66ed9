#include "apidm/usersim.hpp"

#include <algorithm>
#include <cmath>

#include "apidm/error.hpp"
#include "apidm/text.hpp"

namespace apidm {

namespace {

using Row = std::vector<std::pair<ActType, double>>;

void canonicalize(Row& row) {
    std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
}

constexpr ActType kSystemRows[] = {ActType::Start,       ActType::RequestQuery, ActType::SuggKeywords,
                                   ActType::SuggAPI,     ActType::SuggInfoAPI,  ActType::InfoAPI,
                                   ActType::InfoAllAPI,  ActType::ListResults,  ActType::SystemChangePage};

}  // namespace

BigramTable BigramTable::defaults() {
    using A = ActType;
    const Row after_list = {{A::ElicitInfoAPI, .35}, {A::ProvideKeyword, .20}, {A::ProvideQuery, .15},
                            {A::UserChangePage, .15}, {A::RejectComponents, .10}, {A::ElicitSuggAPI, .05}};
    BigramTable table;
    table.rows[A::Start] = {{A::ProvideQuery, 1.0}};
    table.rows[A::RequestQuery] = {{A::ProvideQuery, .8}, {A::ProvideKeyword, .2}};
    table.rows[A::SuggKeywords] = {{A::ProvideKeyword, .6}, {A::RejectKeywords, .3}, {A::ProvideQuery, .1}};
    table.rows[A::ListResults] = after_list;
    table.rows[A::SystemChangePage] = after_list;
    table.rows[A::SuggAPI] = {{A::ElicitInfoAllAPI, .35}, {A::ElicitSuggAPI, .20}, {A::RejectComponents, .20},
                              {A::ProvideKeyword, .15}, {A::ProvideQuery, .10}};
    table.rows[A::SuggInfoAPI] = {{A::ElicitSuggAPI, .30}, {A::RejectComponents, .20}, {A::ElicitListResults, .20},
                                  {A::ProvideKeyword, .15}, {A::ProvideQuery, .15}};
    table.rows[A::InfoAPI] = {{A::ElicitInfoAPI, .45}, {A::ElicitListResults, .15}, {A::ElicitSuggAPI, .10},
                              {A::ProvideKeyword, .10}, {A::ProvideQuery, .10}, {A::RejectComponents, .10}};
    table.rows[A::InfoAllAPI] = {{A::ElicitListResults, .25}, {A::ElicitSuggAPI, .20}, {A::RejectComponents, .20},
                                 {A::ProvideKeyword, .15}, {A::ProvideQuery, .10}, {A::ElicitInfoAPI, .10}};
    for (auto& [act, row] : table.rows) canonicalize(row);
    return table;
}

const Row& BigramTable::row(ActType system_act) const {
    auto it = rows.find(system_act);
    if (it == rows.end()) throw ConfigError("bigram table has no row for " + std::string(act_name(system_act)));
    return it->second;
}

void BigramTable::validate() const {
    for (ActType s : kSystemRows) {
        const auto& r = row(s);
        double total = 0.0;
        for (const auto& [act, p] : r) {
            if (!is_user_act(act) || act == ActType::End || act == ActType::Restart) {
                throw ConfigError("bigram row " + std::string(act_name(s)) + ": invalid user act");
            }
            if (p < 0.0 || p > 1.0) throw ConfigError("bigram probabilities must lie in [0, 1]");
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-9) {
            throw ConfigError("bigram row " + std::string(act_name(s)) + " does not sum to 1");
        }
    }
}

void SimulatorParams::validate() const {
    auto unit = [](double v, const char* name) {
        if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string(name) + " must lie in [0, 1]");
    };
    unit(query_error_min, "query_error_min");
    unit(query_error_max, "query_error_max");
    unit(p_list, "p_list");
    unit(p_sugg, "p_sugg");
    unit(expressiveness_min, "expressiveness_min");
    unit(expressiveness_max, "expressiveness_max");
    if (query_error_min > query_error_max) throw ConfigError("query_error range is empty");
    if (expressiveness_min > expressiveness_max) throw ConfigError("expressiveness range is empty");
    if (query_error_step < 0.0) throw ConfigError("query_error_step must be >= 0");
    if (evidence_threshold < 1 || evidence_per_property < 1 || full_doc_evidence_cap < 1) {
        throw ConfigError("evidence parameters must be >= 1");
    }
    if (query_length_min < 1 || query_length_min > query_length_max) throw ConfigError("bad query length range");
    bigram.validate();
}

void to_json(nlohmann::json& j, const BigramTable& t) {
    j = nlohmann::json::object();
    for (const auto& [system, row] : t.rows) {
        auto& out = j[std::string(act_name(system))];
        out = nlohmann::json::object();
        for (const auto& [user, p] : row) out[std::string(act_name(user))] = p;
    }
}

void from_json(const nlohmann::json& j, BigramTable& t) {
    t.rows.clear();
    for (const auto& [system_name, row] : j.items()) {
        auto system = parse_act_name(system_name, false);
        if (!system) throw ConfigError("bigram: unknown system act '" + system_name + "'");
        Row r;
        for (const auto& [user_name, p] : row.items()) {
            auto user = parse_act_name(user_name, true);
            if (!user) throw ConfigError("bigram: unknown user act '" + user_name + "'");
            r.emplace_back(*user, p.get<double>());
        }
        canonicalize(r);
        t.rows[*system] = std::move(r);
    }
}

void to_json(nlohmann::json& j, const SimulatorParams& p) {
    j = {{"query_error_min", p.query_error_min},
         {"query_error_max", p.query_error_max},
         {"query_error_step", p.query_error_step},
         {"p_list", p.p_list},
         {"p_sugg", p.p_sugg},
         {"evidence_threshold", p.evidence_threshold},
         {"evidence_per_property", p.evidence_per_property},
         {"full_doc_evidence_cap", p.full_doc_evidence_cap},
         {"expressiveness_min", p.expressiveness_min},
         {"expressiveness_max", p.expressiveness_max},
         {"query_cost", p.query_cost},
         {"keyword_cost", p.keyword_cost},
         {"exposure_gain", p.exposure_gain},
         {"query_threshold", p.query_threshold},
         {"keyword_threshold", p.keyword_threshold},
         {"query_length_min", p.query_length_min},
         {"query_length_max", p.query_length_max},
         {"bigram", p.bigram}};
}

void from_json(const nlohmann::json& j, SimulatorParams& p) {
    const SimulatorParams d;
    p.query_error_min = j.value("query_error_min", d.query_error_min);
    p.query_error_max = j.value("query_error_max", d.query_error_max);
    p.query_error_step = j.value("query_error_step", d.query_error_step);
    p.p_list = j.value("p_list", d.p_list);
    p.p_sugg = j.value("p_sugg", d.p_sugg);
    p.evidence_threshold = j.value("evidence_threshold", d.evidence_threshold);
    p.evidence_per_property = j.value("evidence_per_property", d.evidence_per_property);
    p.full_doc_evidence_cap = j.value("full_doc_evidence_cap", d.full_doc_evidence_cap);
    p.expressiveness_min = j.value("expressiveness_min", d.expressiveness_min);
    p.expressiveness_max = j.value("expressiveness_max", d.expressiveness_max);
    p.query_cost = j.value("query_cost", d.query_cost);
    p.keyword_cost = j.value("keyword_cost", d.keyword_cost);
    p.exposure_gain = j.value("exposure_gain", d.exposure_gain);
    p.query_threshold = j.value("query_threshold", d.query_threshold);
    p.keyword_threshold = j.value("keyword_threshold", d.keyword_threshold);
    p.query_length_min = j.value("query_length_min", d.query_length_min);
    p.query_length_max = j.value("query_length_max", d.query_length_max);
    p.bigram = j.contains("bigram") ? j.at("bigram").get<BigramTable>() : d.bigram;
    p.validate();
}

SimulatedUser::SimulatedUser(std::shared_ptr<const ApiDataset> dataset, std::uint64_t seed, SimulatorParams params)
    : dataset_(std::move(dataset)), params_(std::move(params)), rng_(seed) {
    if (!dataset_ || dataset_->size() == 0) throw ContractError("simulated user needs a non-empty dataset");
    params_.validate();
    target_ = rng_.below(dataset_->size());
    query_error_ = rng_.uniform(params_.query_error_min, params_.query_error_max);
    expressiveness_ = rng_.uniform(params_.expressiveness_min, params_.expressiveness_max);
}

void SimulatedUser::set_query_error(double e) { query_error_ = std::clamp(e, 0.0, 1.0); }
void SimulatedUser::set_expressiveness(double x) { expressiveness_ = std::clamp(x, 0.0, 1.0); }

std::vector<double> SimulatedUser::term_distribution(const std::set<std::uint32_t>& excluded) const {
    const std::size_t v = dataset_->vocabulary().size();
    std::vector<double> weights(v, query_error_ / static_cast<double>(v));
    const auto& target_vector = dataset_->search_vector(target_);
    for (std::size_t i = 0; i < target_vector.nnz(); ++i) {
        weights[target_vector.index[i]] += (1.0 - query_error_) * target_vector.value[i];
    }
    for (auto t : excluded) {
        if (t < v) weights[t] = 0.0;
    }
    double total = 0.0;
    for (double w : weights) total += w;
    if (total > 0.0) {
        for (double& w : weights) w /= total;
    }
    return weights;
}

std::vector<std::string> SimulatedUser::sample_terms(std::size_t count, const std::set<std::uint32_t>& excluded) {
    auto weights = term_distribution(excluded);
    std::vector<std::string> terms;
    for (std::size_t i = 0; i < count; ++i) {
        double total = 0.0;
        for (double w : weights) total += w;
        if (total <= 0.0) break;
        const std::size_t t = rng_.weighted(weights);
        terms.push_back(dataset_->vocabulary()[t]);
        weights[t] = 0.0;
    }
    return terms;
}

std::string SimulatedUser::generate_query() {
    const auto length = static_cast<std::size_t>(rng_.between(params_.query_length_min, params_.query_length_max));
    std::string query;
    for (const auto& term : sample_terms(length)) {
        if (!query.empty()) query += ' ';
        query += term;
    }
    return query;
}

bool SimulatedUser::is_candidate(std::size_t component) const {
    return std::any_of(candidates_.begin(), candidates_.end(),
                       [component](const Candidate& c) { return c.component == component; });
}

void SimulatedUser::expose(double amount) {
    expressiveness_ = std::clamp(expressiveness_ + amount, 0.0, 1.0);
}

void SimulatedUser::consider(std::size_t component, double probability) {
    if (is_candidate(component) || resolved_.contains(component)) return;
    if (rng_.bernoulli(probability)) candidates_.push_back({component, 0});
}

void SimulatedUser::present(std::size_t component, int properties) {
    expose(params_.exposure_gain * properties);
    for (auto& c : candidates_) {
        if (c.component == component) c.evidence += properties * params_.evidence_per_property;
    }
}

void SimulatedUser::resolve() {
    for (auto it = candidates_.begin(); it != candidates_.end();) {
        if (it->evidence < params_.evidence_threshold) {
            ++it;
            continue;
        }
        if (it->component == target_) {
            done_ = true;
        } else {
            resolved_.insert(it->component);
            query_error_ = std::max(0.0, query_error_ - params_.query_error_step);
        }
        it = candidates_.erase(it);
    }
}

void SimulatedUser::observe_system_act(const DialogueAct& act) {
    if (!is_system_act(act.type)) throw ContractError("observe_system_act: not a system act");
    auto index_of = [this](const std::string& id) {
        auto index = dataset_->find(id);
        if (!index) throw ContractError("observe_system_act: unknown component '" + id + "'");
        return *index;
    };
    auto full_doc = [this](std::size_t c) {
        return std::min<int>(params_.full_doc_evidence_cap, static_cast<int>(dataset_->component(c).property_count()));
    };
    switch (act.type) {
        case ActType::ListResults:
        case ActType::SystemChangePage:
            for (const auto& id : std::get<payload::Page>(act.payload).ids) {
                const auto c = index_of(id);
                expose(params_.exposure_gain);
                consider(c, params_.p_list);
            }
            break;
        case ActType::SuggAPI: {
            const auto c = index_of(std::get<payload::Component>(act.payload).id);
            expose(params_.exposure_gain);
            consider(c, params_.p_sugg);
            present(c, 1);
            break;
        }
        case ActType::SuggInfoAPI: {
            const auto c = index_of(std::get<payload::Component>(act.payload).id);
            expose(params_.exposure_gain);
            consider(c, params_.p_sugg);
            present(c, full_doc(c));
            break;
        }
        case ActType::InfoAPI: {
            const auto& p = std::get<payload::Properties>(act.payload);
            present(index_of(p.id), static_cast<int>(p.names.size()));
            break;
        }
        case ActType::InfoAllAPI: {
            const auto c = index_of(std::get<payload::Component>(act.payload).id);
            present(c, full_doc(c));
            break;
        }
        default:
            break;
    }
    resolve();
}

std::optional<std::size_t> SimulatedUser::best_candidate() const {
    const Candidate* best = nullptr;
    for (const auto& c : candidates_) {
        if (!best || c.evidence > best->evidence) best = &c;
    }
    if (!best) return std::nullopt;
    return best->component;
}

std::vector<std::string> SimulatedUser::rejectable_components(const DialogueAct& last) const {
    switch (last.type) {
        case ActType::ListResults:
        case ActType::SystemChangePage:
        case ActType::SuggAPI:
        case ActType::SuggInfoAPI:
            break;
        default:
            return {};
    }
    std::vector<std::string> out;
    for (const auto& id : last.component_ids()) {
        const auto c = *dataset_->find(id);
        if (c == target_ || is_candidate(c) || rejected_components_.contains(c)) continue;
        out.push_back(id);
    }
    return out;
}

std::vector<std::string> SimulatedUser::rejectable_keywords(const DialogueAct& last) const {
    if (last.type != ActType::SuggKeywords) return {};
    std::vector<std::string> out;
    for (const auto& term : std::get<payload::Keywords>(last.payload).terms) {
        if (used_keywords_.contains(term)) continue;
        auto index = dataset_->term_index(term);
        if (index && dataset_->contains_term(target_, *index)) continue;
        out.push_back(term);
    }
    return out;
}

std::vector<ActType> SimulatedUser::available_acts(const DialogueAct& last) const {
    std::vector<ActType> acts = {ActType::ProvideQuery, ActType::ProvideKeyword, ActType::ElicitSuggAPI,
                                 ActType::ElicitListResults};
    if (last.type == ActType::ListResults || last.type == ActType::SystemChangePage) {
        acts.push_back(ActType::UserChangePage);
    }
    if (!candidates_.empty()) {
        acts.push_back(ActType::ElicitInfoAPI);
        acts.push_back(ActType::ElicitInfoAllAPI);
    }
    if (!rejectable_components(last).empty()) acts.push_back(ActType::RejectComponents);
    if (!rejectable_keywords(last).empty()) acts.push_back(ActType::RejectKeywords);
    std::sort(acts.begin(), acts.end());
    return acts;
}

DialogueAct SimulatedUser::select_act(const DialogueAct& last) {
    if (ended_) throw ContractError("select_act: the simulated user already ended the dialogue");
    if (done_) {
        ended_ = true;
        return DialogueAct::simple(ActType::End);
    }

    const auto available = available_acts(last);
    const auto& row = params_.bigram.row(last.type);
    std::vector<ActType> acts;
    std::vector<double> weights;
    for (const auto& [act, p] : row) {
        if (p > 0.0 && std::binary_search(available.begin(), available.end(), act)) {
            acts.push_back(act);
            weights.push_back(p);
        }
    }
    ActType chosen = ActType::ProvideQuery;
    if (!acts.empty()) chosen = acts[rng_.weighted(weights)];

    std::set<std::uint32_t> used_terms;
    for (const auto& kw : used_keywords_) {
        if (auto t = dataset_->term_index(kw)) used_terms.insert(*t);
    }

    switch (chosen) {
        case ActType::ProvideQuery: {
            if (expressiveness_ < params_.query_threshold) return DialogueAct::simple(ActType::Unsure);
            expressiveness_ = std::max(0.0, expressiveness_ - params_.query_cost);
            return DialogueAct::query(generate_query());
        }
        case ActType::ProvideKeyword: {
            if (expressiveness_ < params_.keyword_threshold) return DialogueAct::simple(ActType::Unsure);
            auto terms = sample_terms(1, used_terms);
            if (terms.empty()) return DialogueAct::simple(ActType::Unsure);
            expressiveness_ = std::max(0.0, expressiveness_ - params_.keyword_cost);
            used_keywords_.insert(terms.front());
            return DialogueAct::keyword(terms.front());
        }
        case ActType::RejectKeywords: {
            auto terms = rejectable_keywords(last);
            used_keywords_.insert(terms.begin(), terms.end());
            return {ActType::RejectKeywords, payload::Keywords{std::move(terms)}};
        }
        case ActType::RejectComponents: {
            auto ids = rejectable_components(last);
            for (const auto& id : ids) rejected_components_.insert(*dataset_->find(id));
            return {ActType::RejectComponents, payload::Components{std::move(ids)}};
        }
        case ActType::ElicitInfoAPI: {
            const auto c = *best_candidate();
            const auto names = dataset_->component(c).property_names();
            return {ActType::ElicitInfoAPI, payload::Properties{dataset_->id(c), {names[rng_.below(names.size())]}}};
        }
        case ActType::ElicitInfoAllAPI:
            return {ActType::ElicitInfoAllAPI, payload::Component{dataset_->id(*best_candidate())}};
        default:
            return DialogueAct::simple(chosen);
    }
}

}  // namespace apidm
