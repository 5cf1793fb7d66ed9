#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "apidm/rng.hpp"

namespace apidm {

/// Fully connected network, ReLU hidden layers, identity output.
class QNetwork {
public:
    QNetwork() = default;
    /// All weights and biases zero.
    explicit QNetwork(std::vector<std::size_t> sizes);
    /// He-uniform weights, zero biases.
    static QNetwork random(std::vector<std::size_t> sizes, Rng& rng);

    const std::vector<std::size_t>& sizes() const { return sizes_; }
    std::size_t layers() const { return weights_.size(); }
    std::size_t input_size() const { return sizes_.front(); }
    std::size_t output_size() const { return sizes_.back(); }

    /// Layer l weights, row-major [out][in].
    std::vector<double>& weights(std::size_t l) { return weights_.at(l); }
    const std::vector<double>& weights(std::size_t l) const { return weights_.at(l); }
    std::vector<double>& biases(std::size_t l) { return biases_.at(l); }
    const std::vector<double>& biases(std::size_t l) const { return biases_.at(l); }

    std::size_t parameter_count() const;
    /// Flat view over weights then biases, layer by layer.
    double parameter(std::size_t i) const;
    void set_parameter(std::size_t i, double value);

    std::vector<double> forward(std::span<const double> x) const;

    struct Gradient {
        std::vector<std::vector<double>> weights;
        std::vector<std::vector<double>> biases;
    };
    Gradient zero_gradient() const;

    /// Mean over the batch of (Q(x_i)[a_i] - y_i)^2, with its gradient written to `grad`.
    double loss_and_gradient(std::span<const std::vector<double>* const> inputs, std::span<const std::size_t> actions,
                             std::span<const double> targets, Gradient& grad) const;
    void apply_gradient(const Gradient& grad, double learning_rate);

    bool operator==(const QNetwork&) const = default;

private:
    std::vector<std::size_t> sizes_;
    std::vector<std::vector<double>> weights_;
    std::vector<std::vector<double>> biases_;
};

/// Index of the largest value; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);

}  // namespace apidm
