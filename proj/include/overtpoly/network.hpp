#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "overtpoly/interval.hpp"

namespace overtpoly {

enum class Activation { Relu, Identity };

struct Layer {
    std::vector<std::vector<double>> weights;  // weights[out][in]
    std::vector<double> bias;                  // size = out
    Activation act = Activation::Identity;

    int in_dim() const { return weights.empty() ? 0 : static_cast<int>(weights.front().size()); }
    int out_dim() const { return static_cast<int>(weights.size()); }
};

// Feed-forward ReLU network with an optional constant-output mask: masked
// outputs ignore the network and report a fixed value instead.
struct NeuralNetwork {
    std::vector<Layer> layers;
    std::vector<bool> const_mask;      // size = output dim
    std::vector<double> const_values;  // size = output dim, read where masked

    int input_dim() const { return layers.empty() ? 0 : layers.front().in_dim(); }
    int output_dim() const { return layers.empty() ? 0 : layers.back().out_dim(); }

    // Consecutive layer dims chain; final activation is identity; all
    // entries finite; mask arrays sized to the output dim.
    void validate() const;

    std::vector<double> forward(std::span<const double> x) const;
};

class NetworkParseError : public std::runtime_error {
public:
    NetworkParseError(const std::string& what, std::size_t byte_offset);
    std::size_t byte_offset() const { return offset_; }

private:
    std::size_t offset_;
};

// Plain-text format: numLayers line, comma-separated sizes line (input then
// each layer's output), activation tags line, then per layer out_dim weight
// rows and one bias row, then a 0/1 constant-output mask row and a constant
// values row. '#' starts a comment line.
NeuralNetwork load_network(const std::string& path);
NeuralNetwork parse_network(const std::string& text);
std::string serialize_network(const NeuralNetwork& net);

// Sound per-neuron pre-activation intervals, one vector per layer, via
// interval matrix-vector propagation from the input box.
std::vector<std::vector<Interval>> propagate_preactivation_bounds(
    const NeuralNetwork& net, std::span<const Interval> input_box);

// Interval enclosure of the (masked) network output over the input box.
std::vector<Interval> output_interval(const NeuralNetwork& net,
                                      std::span<const Interval> input_box);

}  // namespace overtpoly
