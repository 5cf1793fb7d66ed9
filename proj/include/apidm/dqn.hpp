#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "apidm/episode.hpp"
#include "apidm/qnet.hpp"

namespace apidm {

inline constexpr std::size_t kStateDim = 34;
inline constexpr std::size_t kTopScoreSlots = 10;

/// [system act one-hot 9 | user act one-hot 12, slot 0 = none | turn/max_turns |
///  top-10 scores | r/|D| | fraction of scores > 0].
std::vector<double> encode_state(const PolicyInput& input);
std::vector<double> encode_state(const Session& session);

struct Transition {
    std::vector<double> state;
    std::size_t action = 0;
    double reward = 0.0;
    std::vector<double> next_state;
    bool terminal = false;
};

/// Fixed-capacity FIFO ring buffer with uniform sampling.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(Transition t);
    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    /// i = 0 is the oldest transition still stored.
    const Transition& at(std::size_t i) const;
    /// `count` transitions drawn uniformly with replacement.
    std::vector<const Transition*> sample(std::size_t count, Rng& rng) const;

private:
    std::size_t capacity_;
    std::size_t head_ = 0;
    std::vector<Transition> items_;
};

struct TrainingConfig {
    double gamma = 0.95;
    double learning_rate = 1e-3;
    std::size_t batch_size = 32;
    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    double epsilon_decay_fraction = 0.2;
    long target_sync_every = 1000;
    std::size_t warmup = 1000;
    std::size_t replay_capacity = 50000;
    long total_steps = 200000;
    std::vector<std::size_t> hidden = {64, 64};
    long eval_every = 10000;          // 0 disables periodic evaluation
    int eval_episodes = 200;
    std::uint64_t eval_seed = 1000000;  // held-out episodes use eval_seed + i
    long checkpoint_every = 50000;    // 0 writes only the initial and final checkpoints

    void validate() const;
    double epsilon(long step) const;
};

void to_json(nlohmann::json& j, const TrainingConfig& c);
void from_json(const nlohmann::json& j, TrainingConfig& c);

/// One gradient step on the squared TD error; returns the batch loss before the update.
double train_step(QNetwork& net, const QNetwork& target, std::span<const Transition* const> batch,
                  const TrainingConfig& cfg);

class LearnedPolicy final : public Policy {
public:
    explicit LearnedPolicy(std::shared_ptr<const QNetwork> net);
    std::string name() const override { return "learned"; }
    ActType decide(const PolicyInput& input) const override;
    const QNetwork& network() const { return *net_; }

private:
    std::shared_ptr<const QNetwork> net_;
};

/// Greedy action for a Q-vector: argmax with ties to the lowest action index.
ActType learned_decide(std::span<const double> q_values);

struct CurvePoint {
    long step = 0;
    double mean_core_reward = 0.0;
    double success_rate = 0.0;

    bool operator==(const CurvePoint&) const = default;
};

struct Checkpoint {
    int version = 1;
    long step = 0;
    QNetwork net;
    std::string rng_state;
    TrainingConfig config;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::filesystem::path& path);
nlohmann::json checkpoint_to_json(const Checkpoint& c);
Checkpoint checkpoint_from_json(const nlohmann::json& j);

struct TrainingResult {
    QNetwork net;
    std::vector<CurvePoint> curve;
    long steps = 0;
    long episodes = 0;
    double last_loss = 0.0;
};

std::string curve_to_csv(const std::vector<CurvePoint>& curve);

struct TrainingOutput {
    /// When set, checkpoint.json and curve.csv are (re)written here.
    std::optional<std::filesystem::path> directory;
    /// Called after every curve point.
    std::function<void(const CurvePoint&)> on_curve_point;
};

/// Epsilon-greedy Deep Q-learning against the simulator, shaped reward for
/// learning and core reward for the held-out greedy evaluations.
TrainingResult train_policy(std::shared_ptr<const ApiDataset> dataset, const SimulatorParams& simulator,
                            const SessionConfig& session, const TrainingConfig& cfg, std::uint64_t seed,
                            const TrainingOutput& output = {});

}  // namespace apidm
