#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "apidm/dqn.hpp"
#include "apidm/error.hpp"
#include "apidm/harness.hpp"
#include "apidm/http_server.hpp"
#include "apidm/policies.hpp"
#include "apidm/stats.hpp"
#include "apidm/synth.hpp"

using namespace apidm;
using nlohmann::json;

namespace {

/// A corpus file, or "synthetic[:count[:seed]]" for a generated one.
std::shared_ptr<const ApiDataset> open_corpus(const std::string& source) {
    if (source.rfind("synthetic", 0) == 0 && !std::filesystem::exists(source)) {
        SyntheticCorpusSpec s;
        std::stringstream in(source);
        std::string part;
        std::getline(in, part, ':');
        if (std::getline(in, part, ':')) s.count = std::stoul(part);
        if (std::getline(in, part, ':')) s.seed = std::stoull(part);
        return std::make_shared<const ApiDataset>(generate_dataset(s));
    }
    return std::make_shared<const ApiDataset>(load_dataset(source));
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError(path + " is not valid JSON");
    return j;
}

void write_file(const std::string& path, const std::string& text) {
    if (path == "-" || path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out << text;
}

struct Common {
    std::string corpus = "synthetic";
    std::string sim_config;
    std::string session_config;
    std::string checkpoint;
    std::string hand_config;

    SimulatorParams simulator() const {
        return sim_config.empty() ? SimulatorParams{} : read_json(sim_config).get<SimulatorParams>();
    }
    SessionConfig session() const {
        return session_config.empty() ? SessionConfig{} : read_json(session_config).get<SessionConfig>();
    }
    HandCraftedConfig hand() const {
        if (hand_config.empty()) return {};
        auto j = read_json(hand_config);
        return (j.contains("best") ? j["best"] : j).get<HandCraftedConfig>();
    }

    std::shared_ptr<const Policy> policy(const std::string& name) const {
        if (name == "single-turn") return std::make_shared<SingleTurnPolicy>();
        if (name == "hand-crafted") return std::make_shared<HandCraftedPolicy>(hand());
        if (name == "learned") {
            if (checkpoint.empty()) throw ConfigError("the learned policy needs --checkpoint");
            return std::make_shared<LearnedPolicy>(std::make_shared<const QNetwork>(load_checkpoint(checkpoint).net));
        }
        throw ConfigError("unknown policy '" + name + "' (single-turn, hand-crafted, learned)");
    }

    json provenance() const {
        json j = {{"corpus", corpus}, {"simulator", simulator()}, {"session", session()}};
        if (!checkpoint.empty()) j["checkpoint"] = checkpoint;
        j["hand_crafted"] = hand();
        return j;
    }
};

void add_common(CLI::App* cmd, Common& c, bool policies = true) {
    cmd->add_option("-c,--corpus", c.corpus, "Corpus JSON file, or synthetic[:count[:seed]]");
    cmd->add_option("--sim-config", c.sim_config, "Simulator parameters (JSON)");
    cmd->add_option("--session-config", c.session_config, "Session config: N, K, max_turns, rewards (JSON)");
    if (policies) {
        cmd->add_option("--checkpoint", c.checkpoint, "Checkpoint for the learned policy");
        cmd->add_option("--hand-config", c.hand_config, "Hand-crafted thresholds, or a grid-search result (JSON)");
    }
}

std::vector<std::vector<double>> read_matrix_csv(const std::string& path, std::vector<std::string>& labels) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError(path + " is empty");
    auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        return cells;
    };
    const auto header = split(line);
    std::vector<std::size_t> columns;
    for (std::size_t i = 0; i < header.size(); ++i) {
        const auto& h = header[i];
        if (h.size() > 7 && h.compare(h.size() - 7, 7, "_reward") == 0) columns.push_back(i);
    }
    if (columns.empty()) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] != "seed") columns.push_back(i);
        }
    }
    for (auto c : columns) {
        const auto& h = header[c];
        labels.push_back(h.size() > 7 && h.compare(h.size() - 7, 7, "_reward") == 0 ? h.substr(0, h.size() - 7) : h);
    }
    std::vector<std::vector<double>> matrix;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split(line);
        std::vector<double> row;
        for (auto c : columns) {
            if (c >= cells.size()) throw ConfigError(path + ": short row");
            row.push_back(std::stod(cells[c]));
        }
        matrix.push_back(std::move(row));
    }
    return matrix;
}

HttpServer* g_server = nullptr;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dialogue manager for API documentation search"};
    app.require_subcommand(1);

    // gen-corpus
    auto* gen = app.add_subcommand("gen-corpus", "Write a synthetic API corpus");
    SyntheticCorpusSpec gen_spec;
    std::string gen_out = "-";
    gen->add_option("-n,--count", gen_spec.count, "Number of functions")->capture_default_str();
    gen->add_option("--vocabulary", gen_spec.vocabulary, "Vocabulary size")->capture_default_str();
    gen->add_option("--seed", gen_spec.seed, "Seed")->capture_default_str();
    gen->add_option("--api", gen_spec.api, "API name")->capture_default_str();
    gen->add_option("--prefix", gen_spec.prefix, "Function name prefix")->capture_default_str();
    gen->add_option("-o,--out", gen_out, "Output file (- for stdout)");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Play simulated dialogues and print transcripts");
    Common sim_c;
    std::string sim_policy = "hand-crafted";
    std::uint64_t sim_seed = 1;
    int sim_episodes = 1;
    std::string sim_out = "-";
    add_common(sim, sim_c);
    sim->add_option("-p,--policy", sim_policy, "Policy")->capture_default_str();
    sim->add_option("--seed", sim_seed, "Seed of the first episode")->capture_default_str();
    sim->add_option("-n,--episodes", sim_episodes, "Episodes")->capture_default_str();
    sim->add_option("-o,--out", sim_out, "Output JSON file (- for stdout)");

    // grid-search
    auto* grid = app.add_subcommand("grid-search", "Calibrate hand-crafted thresholds");
    Common grid_c;
    std::string grid_file;
    int grid_episodes = 200;
    std::uint64_t grid_seed = 1;
    unsigned grid_threads = 0;
    std::string grid_out = "-";
    add_common(grid, grid_c, false);
    grid->add_option("--grid", grid_file, "Threshold grid (JSON); defaults to the 3x3x3x3 grid");
    grid->add_option("-n,--episodes", grid_episodes, "Episodes per cell")->capture_default_str();
    grid->add_option("--seed", grid_seed, "Seed of the first episode")->capture_default_str();
    grid->add_option("--threads", grid_threads, "Worker threads (0 = all cores)");
    grid->add_option("-o,--out", grid_out, "Output JSON file");

    // train
    auto* train = app.add_subcommand("train", "Train the learned policy with Deep Q-learning");
    Common train_c;
    std::string train_config;
    std::string train_dir = "train_out";
    long train_steps = -1;
    std::uint64_t train_seed = 1;
    add_common(train, train_c, false);
    train->add_option("--config", train_config, "Training config (JSON)");
    train->add_option("--steps", train_steps, "Total environment steps (overrides the config)");
    train->add_option("--seed", train_seed, "Seed")->capture_default_str();
    train->add_option("--out-dir", train_dir, "Directory for checkpoint.json and curve.csv")->capture_default_str();

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "Paired evaluation of policies");
    Common eval_c;
    std::vector<std::string> eval_policies = {"single-turn", "hand-crafted"};
    int eval_n = 1000;
    std::uint64_t eval_seed = 1;
    unsigned eval_threads = 0;
    std::string eval_json = "-";
    std::string eval_csv;
    add_common(eval, eval_c);
    eval->add_option("-p,--policies", eval_policies, "Policies (space or comma separated)")->delimiter(',')->capture_default_str();
    eval->add_option("-n,--episodes", eval_n, "Episodes")->capture_default_str();
    eval->add_option("--seed", eval_seed, "Base seed")->capture_default_str();
    eval->add_option("--threads", eval_threads, "Worker threads (0 = all cores)");
    eval->add_option("--json", eval_json, "Summary JSON output (- for stdout)");
    eval->add_option("--csv", eval_csv, "Per-episode CSV output");

    // compare
    auto* cmp = app.add_subcommand("compare", "Confusion matrix of two policies on shared states");
    Common cmp_c;
    std::string cmp_a = "learned";
    std::string cmp_b = "hand-crafted";
    int cmp_n = 1000;
    std::uint64_t cmp_seed = 1;
    std::string cmp_out = "-";
    std::string cmp_json;
    add_common(cmp, cmp_c);
    cmp->add_option("-a,--policy-a", cmp_a, "Driving policy (rows)")->capture_default_str();
    cmp->add_option("-b,--policy-b", cmp_b, "Shadow policy (columns)")->capture_default_str();
    cmp->add_option("-n,--episodes", cmp_n, "Episodes")->capture_default_str();
    cmp->add_option("--seed", cmp_seed, "Base seed")->capture_default_str();
    cmp->add_option("-o,--out", cmp_out, "Confusion matrix CSV (- for stdout)");
    cmp->add_option("--json", cmp_json, "Summary JSON output");

    // stats
    auto* st = app.add_subcommand("stats", "Friedman test on a per-episode CSV");
    std::string st_csv;
    double st_alpha = 0.05;
    bool st_bonferroni = false;
    st->add_option("csv", st_csv, "CSV from evaluate --csv, or a plain numeric matrix")->required();
    st->add_option("--alpha", st_alpha, "Significance level")->capture_default_str();
    st->add_flag("--bonferroni", st_bonferroni, "Bonferroni-correct the pairwise critical difference");

    // serve
    auto* srv = app.add_subcommand("serve", "Serve the session API over HTTP");
    std::vector<std::string> srv_corpora = {"synthetic"};
    std::string srv_policy = "hand-crafted";
    std::string srv_checkpoint;
    std::string srv_host = "127.0.0.1";
    int srv_port = 8080;
    std::string srv_static;
    std::uint64_t srv_seed = 1;
    srv->add_option("-c,--corpus", srv_corpora, "Corpora as [name=]path or synthetic[:count[:seed]]");
    srv->add_option("-p,--policy", srv_policy, "Default policy")->capture_default_str();
    srv->add_option("--checkpoint", srv_checkpoint, "Checkpoint enabling the learned policy");
    srv->add_option("--host", srv_host, "Bind address")->capture_default_str();
    srv->add_option("--port", srv_port, "Port")->capture_default_str();
    srv->add_option("--static", srv_static, "Directory with the built web client");
    srv->add_option("--seed", srv_seed, "Seed for session ids and tie-breaks")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            write_file(gen_out, generate_corpus_json(gen_spec).dump(2) + "\n");
        } else if (*sim) {
            auto dataset = open_corpus(sim_c.corpus);
            auto policy = sim_c.policy(sim_policy);
            json out = {{"config", sim_c.provenance()}, {"policy", sim_policy}, {"episodes", json::array()}};
            for (int e = 0; e < sim_episodes; ++e) {
                const std::uint64_t seed = sim_seed + static_cast<std::uint64_t>(e);
                Episode episode(dataset, policy, sim_c.simulator(), sim_c.session(), seed);
                while (!episode.finished()) episode.step();
                json transcript = json::array();
                for (const auto& t : episode.session().transcript()) transcript.push_back(transcript_entry_to_json(t));
                const auto m = episode.metrics();
                out["episodes"].push_back({{"seed", seed},
                                           {"target", episode.user().target_id()},
                                           {"success", m.success},
                                           {"turns", m.turns},
                                           {"total_core_reward", m.total_core_reward},
                                           {"transcript", transcript}});
            }
            write_file(sim_out, out.dump(2) + "\n");
        } else if (*grid) {
            auto dataset = open_corpus(grid_c.corpus);
            const auto g = grid_file.empty() ? ThresholdGrid::defaults() : read_json(grid_file).get<ThresholdGrid>();
            const auto result = grid_search(g, dataset, grid_c.simulator(), grid_episodes, grid_seed,
                                            grid_c.session(), grid_threads);
            auto j = grid_result_to_json(result);
            j["config"] = grid_c.provenance();
            j["config"]["grid"] = g;
            j["config"]["episodes_per_cell"] = grid_episodes;
            j["config"]["seed"] = grid_seed;
            write_file(grid_out, j.dump(2) + "\n");
        } else if (*train) {
            auto dataset = open_corpus(train_c.corpus);
            TrainingConfig cfg = train_config.empty() ? TrainingConfig{} : read_json(train_config).get<TrainingConfig>();
            if (train_steps >= 0) cfg.total_steps = train_steps;
            TrainingOutput output;
            output.directory = train_dir;
            output.on_curve_point = [](const CurvePoint& p) {
                std::cerr << "step " << p.step << "  mean core reward " << p.mean_core_reward << "  success "
                          << p.success_rate << '\n';
            };
            const auto result = train_policy(dataset, train_c.simulator(), train_c.session(), cfg, train_seed, output);
            json meta = train_c.provenance();
            meta["training"] = cfg;
            meta["seed"] = train_seed;
            meta["steps"] = result.steps;
            meta["episodes"] = result.episodes;
            write_file((std::filesystem::path(train_dir) / "config.json").string(), meta.dump(2) + "\n");
            std::cerr << "wrote " << train_dir << "/checkpoint.json\n";
        } else if (*eval) {
            auto dataset = open_corpus(eval_c.corpus);
            std::vector<std::shared_ptr<const Policy>> policies;
            for (const auto& name : eval_policies) policies.push_back(eval_c.policy(name));
            const auto result = run_evaluation(dataset, policies, eval_n, eval_seed, eval_c.simulator(),
                                               eval_c.session(), eval_threads);
            auto j = evaluation_to_json(result);
            j["config"] = eval_c.provenance();
            if (policies.size() >= 2 && result.episodes() >= 2) {
                j["friedman"] = friedman_to_json(friedman_test(result.reward_matrix()), result.policies);
            }
            write_file(eval_json, j.dump(2) + "\n");
            if (!eval_csv.empty()) write_file(eval_csv, evaluation_to_csv(result));
        } else if (*cmp) {
            auto dataset = open_corpus(cmp_c.corpus);
            const auto result = compare_policies(dataset, cmp_c.policy(cmp_a), cmp_c.policy(cmp_b), cmp_n, cmp_seed,
                                                 cmp_c.simulator(), cmp_c.session());
            write_file(cmp_out, comparison_to_csv(result));
            if (!cmp_json.empty()) {
                json j = {{"policy_a", cmp_a},
                          {"policy_b", cmp_b},
                          {"episodes", result.episodes},
                          {"decisions", result.decisions},
                          {"divergence_rate", result.divergence_rate()},
                          {"confusion", result.confusion},
                          {"config", cmp_c.provenance()}};
                write_file(cmp_json, j.dump(2) + "\n");
            }
        } else if (*st) {
            std::vector<std::string> labels;
            const auto matrix = read_matrix_csv(st_csv, labels);
            auto j = friedman_to_json(friedman_test(matrix, st_alpha, st_bonferroni), labels);
            j["input"] = st_csv;
            std::cout << j.dump(2) << '\n';
        } else if (*srv) {
            ServiceOptions options;
            for (const auto& entry : srv_corpora) {
                std::string name;
                std::string path = entry;
                if (auto eq = entry.find('='); eq != std::string::npos) {
                    name = entry.substr(0, eq);
                    path = entry.substr(eq + 1);
                }
                auto dataset = open_corpus(path);
                if (name.empty()) name = dataset->api();
                options.corpora[name] = dataset;
                if (options.default_corpus.empty()) options.default_corpus = name;
            }
            register_standard_policies(options, srv_checkpoint.empty() ? std::nullopt : std::optional(srv_checkpoint));
            options.default_policy = srv_policy;
            options.seed = srv_seed;
            if (!options.policies.contains(srv_policy)) throw ConfigError("unknown default policy '" + srv_policy + "'");
            SessionService service(std::move(options));
            HttpServer server(service, srv_static.empty() ? std::nullopt : std::optional<std::filesystem::path>(srv_static));
            const int port = server.bind(srv_host, srv_port);
            g_server = &server;
            std::signal(SIGINT, [](int) {
                if (g_server) g_server->stop();
            });
            std::cerr << "listening on http://" << srv_host << ':' << port << '\n';
            server.listen();
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
