#include "apidm/qnet.hpp"

#include <cmath>

#include "apidm/error.hpp"

namespace apidm {

QNetwork::QNetwork(std::vector<std::size_t> sizes) : sizes_(std::move(sizes)) {
    if (sizes_.size() < 2) throw ConfigError("network needs at least an input and an output layer");
    for (auto s : sizes_) {
        if (s == 0) throw ConfigError("network layers must be non-empty");
    }
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
        weights_.emplace_back(sizes_[l] * sizes_[l + 1], 0.0);
        biases_.emplace_back(sizes_[l + 1], 0.0);
    }
}

QNetwork QNetwork::random(std::vector<std::size_t> sizes, Rng& rng) {
    QNetwork net(std::move(sizes));
    for (std::size_t l = 0; l < net.layers(); ++l) {
        const double limit = std::sqrt(6.0 / static_cast<double>(net.sizes_[l]));
        for (auto& w : net.weights_[l]) w = rng.uniform(-limit, limit);
    }
    return net;
}

std::size_t QNetwork::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < layers(); ++l) n += weights_[l].size() + biases_[l].size();
    return n;
}

double QNetwork::parameter(std::size_t i) const {
    for (std::size_t l = 0; l < layers(); ++l) {
        if (i < weights_[l].size()) return weights_[l][i];
        i -= weights_[l].size();
        if (i < biases_[l].size()) return biases_[l][i];
        i -= biases_[l].size();
    }
    throw ContractError("parameter index out of range");
}

void QNetwork::set_parameter(std::size_t i, double value) {
    for (std::size_t l = 0; l < layers(); ++l) {
        if (i < weights_[l].size()) {
            weights_[l][i] = value;
            return;
        }
        i -= weights_[l].size();
        if (i < biases_[l].size()) {
            biases_[l][i] = value;
            return;
        }
        i -= biases_[l].size();
    }
    throw ContractError("parameter index out of range");
}

namespace {

void affine(const std::vector<double>& w, const std::vector<double>& b, std::span<const double> in,
            std::vector<double>& out) {
    const std::size_t n_in = in.size();
    out.assign(b.begin(), b.end());
    for (std::size_t o = 0; o < out.size(); ++o) {
        const double* row = w.data() + o * n_in;
        double sum = 0.0;
        for (std::size_t i = 0; i < n_in; ++i) sum += row[i] * in[i];
        out[o] += sum;
    }
}

}  // namespace

std::vector<double> QNetwork::forward(std::span<const double> x) const {
    if (sizes_.empty()) throw ContractError("forward on an empty network");
    if (x.size() != input_size()) throw ContractError("input size does not match the network");
    std::vector<double> current(x.begin(), x.end());
    std::vector<double> next;
    for (std::size_t l = 0; l < layers(); ++l) {
        affine(weights_[l], biases_[l], current, next);
        if (l + 1 < layers()) {
            for (auto& v : next) v = v > 0.0 ? v : 0.0;
        }
        current.swap(next);
    }
    return current;
}

QNetwork::Gradient QNetwork::zero_gradient() const {
    Gradient g;
    for (std::size_t l = 0; l < layers(); ++l) {
        g.weights.emplace_back(weights_[l].size(), 0.0);
        g.biases.emplace_back(biases_[l].size(), 0.0);
    }
    return g;
}

double QNetwork::loss_and_gradient(std::span<const std::vector<double>* const> inputs,
                                   std::span<const std::size_t> actions, std::span<const double> targets,
                                   Gradient& grad) const {
    const std::size_t batch = inputs.size();
    if (batch == 0) throw ContractError("empty batch");
    if (actions.size() != batch || targets.size() != batch) throw ContractError("batch fields differ in length");
    grad = zero_gradient();

    const std::size_t L = layers();
    std::vector<std::vector<double>> act(L + 1);
    std::vector<double> delta;
    std::vector<double> prev_delta;
    double loss = 0.0;
    const double scale = 1.0 / static_cast<double>(batch);

    for (std::size_t s = 0; s < batch; ++s) {
        const auto& x = *inputs[s];
        if (x.size() != input_size()) throw ContractError("input size does not match the network");
        if (actions[s] >= output_size()) throw ContractError("action index out of range");
        act[0] = x;
        for (std::size_t l = 0; l < L; ++l) {
            affine(weights_[l], biases_[l], act[l], act[l + 1]);
            if (l + 1 < L) {
                for (auto& v : act[l + 1]) v = v > 0.0 ? v : 0.0;
            }
        }
        const double err = act[L][actions[s]] - targets[s];
        loss += err * err * scale;

        delta.assign(output_size(), 0.0);
        delta[actions[s]] = 2.0 * err * scale;
        for (std::size_t l = L; l-- > 0;) {
            const std::size_t n_in = sizes_[l];
            auto& gw = grad.weights[l];
            auto& gb = grad.biases[l];
            const auto& in = act[l];
            for (std::size_t o = 0; o < delta.size(); ++o) {
                const double d = delta[o];
                if (d == 0.0) continue;
                gb[o] += d;
                double* row = gw.data() + o * n_in;
                for (std::size_t i = 0; i < n_in; ++i) row[i] += d * in[i];
            }
            if (l == 0) break;
            prev_delta.assign(n_in, 0.0);
            const auto& w = weights_[l];
            for (std::size_t o = 0; o < delta.size(); ++o) {
                const double d = delta[o];
                if (d == 0.0) continue;
                const double* row = w.data() + o * n_in;
                for (std::size_t i = 0; i < n_in; ++i) prev_delta[i] += d * row[i];
            }
            for (std::size_t i = 0; i < n_in; ++i) {
                if (in[i] <= 0.0) prev_delta[i] = 0.0;
            }
            delta.swap(prev_delta);
        }
    }
    return loss;
}

void QNetwork::apply_gradient(const Gradient& grad, double learning_rate) {
    for (std::size_t l = 0; l < layers(); ++l) {
        for (std::size_t i = 0; i < weights_[l].size(); ++i) weights_[l][i] -= learning_rate * grad.weights[l][i];
        for (std::size_t i = 0; i < biases_[l].size(); ++i) biases_[l][i] -= learning_rate * grad.biases[l][i];
    }
}

std::size_t argmax(std::span<const double> values) {
    if (values.empty()) throw ContractError("argmax of an empty vector");
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) best = i;
    }
    return best;
}

}  // namespace apidm
