#include "apidm/dqn.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "apidm/error.hpp"
#include "apidm/harness.hpp"

namespace apidm {

std::vector<double> encode_state(const PolicyInput& input) {
    const auto& state = input.state;
    std::vector<double> x(kStateDim, 0.0);
    x[static_cast<std::size_t>(state.last_system_act)] = 1.0;

    std::size_t user_slot = 0;
    if (state.last_user_act && *state.last_user_act != ActType::End) {
        user_slot = 1 + static_cast<std::size_t>(*state.last_user_act) - static_cast<std::size_t>(ActType::ProvideQuery);
    }
    x[9 + user_slot] = 1.0;

    std::size_t i = 21;
    x[i++] = std::min(1.0, static_cast<double>(state.turn_count) / input.config.max_turns);
    const auto top = state.results.top_scores(kTopScoreSlots);
    for (std::size_t s = 0; s < kTopScoreSlots; ++s) x[i++] = s < top.size() ? top[s] : 0.0;
    const double size = input.dataset_size == 0 ? 1.0 : static_cast<double>(input.dataset_size);
    x[i++] = std::min(1.0, static_cast<double>(state.results.result_index()) / size);
    x[i++] = static_cast<double>(state.results.positive_count()) / size;
    return x;
}

std::vector<double> encode_state(const Session& session) { return encode_state(session.policy_input()); }

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ConfigError("replay capacity must be positive");
    items_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::push(Transition t) {
    if (items_.size() < capacity_) {
        items_.push_back(std::move(t));
        return;
    }
    items_[head_] = std::move(t);
    head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
    if (i >= items_.size()) throw ContractError("replay index out of range");
    return items_[(head_ + i) % items_.size()];
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t count, Rng& rng) const {
    if (items_.empty()) throw ContractError("sampling from an empty replay buffer");
    std::vector<const Transition*> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(&items_[rng.below(items_.size())]);
    return out;
}

void TrainingConfig::validate() const {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must be in [0, 1)");
    if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
    if (batch_size == 0) throw ConfigError("batch size must be positive");
    if (!(epsilon_start > 0.0 && epsilon_start <= 1.0 && epsilon_end > 0.0 && epsilon_end <= 1.0)) {
        throw ConfigError("epsilon must be in (0, 1]");
    }
    if (epsilon_decay_fraction < 0.0 || epsilon_decay_fraction > 1.0) throw ConfigError("epsilon decay fraction must be in [0, 1]");
    if (target_sync_every < 1) throw ConfigError("target sync interval must be >= 1");
    if (replay_capacity == 0) throw ConfigError("replay capacity must be positive");
    if (total_steps < 0) throw ConfigError("total steps must be >= 0");
    if (eval_every < 0 || checkpoint_every < 0) throw ConfigError("cadences must be >= 0");
    if (eval_episodes < 1) throw ConfigError("eval episodes must be >= 1");
    for (auto h : hidden) {
        if (h == 0) throw ConfigError("hidden layers must be non-empty");
    }
}

double TrainingConfig::epsilon(long step) const {
    const double horizon = epsilon_decay_fraction * static_cast<double>(total_steps);
    if (horizon <= 0.0 || step >= horizon) return epsilon_end;
    return epsilon_start + (epsilon_end - epsilon_start) * (static_cast<double>(step) / horizon);
}

void to_json(nlohmann::json& j, const TrainingConfig& c) {
    j = {{"gamma", c.gamma},
         {"learning_rate", c.learning_rate},
         {"batch_size", c.batch_size},
         {"epsilon_start", c.epsilon_start},
         {"epsilon_end", c.epsilon_end},
         {"epsilon_decay_fraction", c.epsilon_decay_fraction},
         {"target_sync_every", c.target_sync_every},
         {"warmup", c.warmup},
         {"replay_capacity", c.replay_capacity},
         {"total_steps", c.total_steps},
         {"hidden", c.hidden},
         {"eval_every", c.eval_every},
         {"eval_episodes", c.eval_episodes},
         {"eval_seed", c.eval_seed},
         {"checkpoint_every", c.checkpoint_every}};
}

void from_json(const nlohmann::json& j, TrainingConfig& c) {
    const TrainingConfig d;
    c.gamma = j.value("gamma", d.gamma);
    c.learning_rate = j.value("learning_rate", d.learning_rate);
    c.batch_size = j.value("batch_size", d.batch_size);
    c.epsilon_start = j.value("epsilon_start", d.epsilon_start);
    c.epsilon_end = j.value("epsilon_end", d.epsilon_end);
    c.epsilon_decay_fraction = j.value("epsilon_decay_fraction", d.epsilon_decay_fraction);
    c.target_sync_every = j.value("target_sync_every", d.target_sync_every);
    c.warmup = j.value("warmup", d.warmup);
    c.replay_capacity = j.value("replay_capacity", d.replay_capacity);
    c.total_steps = j.value("total_steps", d.total_steps);
    c.hidden = j.value("hidden", d.hidden);
    c.eval_every = j.value("eval_every", d.eval_every);
    c.eval_episodes = j.value("eval_episodes", d.eval_episodes);
    c.eval_seed = j.value("eval_seed", d.eval_seed);
    c.checkpoint_every = j.value("checkpoint_every", d.checkpoint_every);
    c.validate();
}

double train_step(QNetwork& net, const QNetwork& target, std::span<const Transition* const> batch,
                  const TrainingConfig& cfg) {
    if (batch.empty()) throw ContractError("train_step needs a non-empty batch");
    std::vector<const std::vector<double>*> inputs;
    std::vector<std::size_t> actions;
    std::vector<double> targets;
    inputs.reserve(batch.size());
    actions.reserve(batch.size());
    targets.reserve(batch.size());
    for (const auto* t : batch) {
        double y = t->reward;
        if (!t->terminal) {
            const auto q_next = target.forward(t->next_state);
            y += cfg.gamma * *std::max_element(q_next.begin(), q_next.end());
        }
        inputs.push_back(&t->state);
        actions.push_back(t->action);
        targets.push_back(y);
    }
    QNetwork::Gradient grad;
    const double loss = net.loss_and_gradient(inputs, actions, targets, grad);
    net.apply_gradient(grad, cfg.learning_rate);
    return loss;
}

ActType learned_decide(std::span<const double> q_values) {
    if (q_values.size() != kSelectableActCount) throw ContractError("expected one Q-value per selectable act");
    return action_at(argmax(q_values));
}

LearnedPolicy::LearnedPolicy(std::shared_ptr<const QNetwork> net) : net_(std::move(net)) {
    if (!net_) throw ContractError("learned policy needs a network");
    if (net_->input_size() != kStateDim || net_->output_size() != kSelectableActCount) {
        throw ConfigError("network shape does not match the state encoding and action space");
    }
}

ActType LearnedPolicy::decide(const PolicyInput& input) const {
    return learned_decide(net_->forward(encode_state(input)));
}

nlohmann::json checkpoint_to_json(const Checkpoint& c) {
    nlohmann::json j;
    j["version"] = c.version;
    j["step"] = c.step;
    j["sizes"] = c.net.sizes();
    j["weights"] = nlohmann::json::array();
    j["biases"] = nlohmann::json::array();
    for (std::size_t l = 0; l < c.net.layers(); ++l) {
        j["weights"].push_back(c.net.weights(l));
        j["biases"].push_back(c.net.biases(l));
    }
    j["rng_state"] = c.rng_state;
    j["config"] = c.config;
    return j;
}

Checkpoint checkpoint_from_json(const nlohmann::json& j) {
    Checkpoint c;
    try {
        c.version = j.at("version").get<int>();
        if (c.version != 1) throw ConfigError("unsupported checkpoint version " + std::to_string(c.version));
        c.step = j.at("step").get<long>();
        c.net = QNetwork(j.at("sizes").get<std::vector<std::size_t>>());
        const auto& weights = j.at("weights");
        const auto& biases = j.at("biases");
        if (weights.size() != c.net.layers() || biases.size() != c.net.layers()) {
            throw ConfigError("checkpoint layer count does not match its sizes");
        }
        for (std::size_t l = 0; l < c.net.layers(); ++l) {
            auto w = weights.at(l).get<std::vector<double>>();
            auto b = biases.at(l).get<std::vector<double>>();
            if (w.size() != c.net.weights(l).size() || b.size() != c.net.biases(l).size()) {
                throw ConfigError("checkpoint layer " + std::to_string(l) + " has the wrong shape");
            }
            c.net.weights(l) = std::move(w);
            c.net.biases(l) = std::move(b);
        }
        c.rng_state = j.value("rng_state", std::string{});
        if (j.contains("config")) c.config = j.at("config").get<TrainingConfig>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed checkpoint: ") + e.what());
    }
    return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw ConfigError("cannot write " + tmp.string());
        out << checkpoint_to_json(c).dump();
        if (!out.flush()) throw ConfigError("cannot write " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read checkpoint " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("checkpoint " + path.string() + " is not valid JSON: " + e.what());
    }
    return checkpoint_from_json(j);
}

std::string curve_to_csv(const std::vector<CurvePoint>& curve) {
    std::ostringstream out;
    out.precision(17);
    out << "step,mean_core_reward,success_rate\n";
    for (const auto& p : curve) out << p.step << ',' << p.mean_core_reward << ',' << p.success_rate << '\n';
    return out.str();
}

namespace {

CurvePoint evaluate_greedy(const std::shared_ptr<const ApiDataset>& dataset, const QNetwork& net,
                           const SimulatorParams& simulator, const SessionConfig& session,
                           const TrainingConfig& cfg, long step) {
    std::vector<std::shared_ptr<const Policy>> policy{
        std::make_shared<LearnedPolicy>(std::make_shared<const QNetwork>(net))};
    const auto eval = run_evaluation(dataset, policy, cfg.eval_episodes, cfg.eval_seed, simulator, session, 1);
    return {step, eval.mean_core_reward(0), eval.success_rate(0)};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw ConfigError("cannot write " + tmp.string());
        out << text;
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace

TrainingResult train_policy(std::shared_ptr<const ApiDataset> dataset, const SimulatorParams& simulator,
                            const SessionConfig& session, const TrainingConfig& cfg, std::uint64_t seed,
                            const TrainingOutput& output) {
    if (!dataset) throw ContractError("train_policy needs a dataset");
    cfg.validate();
    simulator.validate();
    session.validate();

    Rng rng(mix_seed(seed, 10));
    Rng episode_seeds(mix_seed(seed, 11));
    std::vector<std::size_t> sizes{kStateDim};
    sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
    sizes.push_back(kSelectableActCount);

    TrainingResult result;
    result.net = QNetwork::random(sizes, rng);
    QNetwork target = result.net;
    ReplayBuffer buffer(cfg.replay_capacity);

    if (output.directory) std::filesystem::create_directories(*output.directory);
    auto checkpoint = [&](long step) {
        if (!output.directory) return;
        save_checkpoint(*output.directory / "checkpoint.json", {1, step, result.net, rng.state(), cfg});
        write_text(*output.directory / "curve.csv", curve_to_csv(result.curve));
    };
    auto record = [&](long step) {
        result.curve.push_back(evaluate_greedy(dataset, result.net, simulator, session, cfg, step));
        if (output.on_curve_point) output.on_curve_point(result.curve.back());
    };

    record(0);
    checkpoint(0);

    long step = 0;
    std::optional<Episode> episode;
    std::vector<double> state;
    while (step < cfg.total_steps) {
        if (!episode || episode->finished()) {
            episode.emplace(dataset, nullptr, simulator, session, episode_seeds.next());
            state = encode_state(episode->session());
            ++result.episodes;
        }
        std::size_t action;
        if (rng.uniform() < cfg.epsilon(step)) {
            action = rng.below(kSelectableActCount);
        } else {
            action = argmax(result.net.forward(state));
        }
        const auto outcome = episode->step(action_at(action));
        auto next_state = encode_state(episode->session());
        buffer.push({state, action, outcome.training_reward, next_state, outcome.terminal});
        state = std::move(next_state);

        if (buffer.size() >= std::max(cfg.warmup, std::size_t{1})) {
            const auto batch = buffer.sample(cfg.batch_size, rng);
            result.last_loss = train_step(result.net, target, batch, cfg);
        }
        ++step;
        if (step % cfg.target_sync_every == 0) target = result.net;
        const bool is_last = step == cfg.total_steps;
        if ((cfg.eval_every > 0 && step % cfg.eval_every == 0) || is_last) {
            if (result.curve.empty() || result.curve.back().step != step) record(step);
        }
        if ((cfg.checkpoint_every > 0 && step % cfg.checkpoint_every == 0) || is_last) checkpoint(step);
    }
    result.steps = step;
    return result;
}

}  // namespace apidm
