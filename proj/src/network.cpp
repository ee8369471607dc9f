#include "overtpoly/network.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fmt/format.h"

namespace overtpoly {

namespace {

// Line reader over an in-memory buffer that tracks the byte offset of the
// line it most recently produced. Comment ('#') and blank lines are skipped.
class Cursor {
public:
    explicit Cursor(const std::string& text) : text_(text) {}

    bool next_line(std::string& out) {
        while (pos_ < text_.size()) {
            line_start_ = pos_;
            const std::size_t nl = text_.find('\n', pos_);
            const std::size_t end = nl == std::string::npos ? text_.size() : nl;
            out.assign(text_, pos_, end - pos_);
            pos_ = nl == std::string::npos ? text_.size() : nl + 1;
            if (!out.empty() && out.back() == '\r') out.pop_back();
            const auto first = out.find_first_not_of(" \t");
            if (first == std::string::npos || out[first] == '#') continue;
            return true;
        }
        line_start_ = text_.size();
        return false;
    }

    std::string require_line(const char* what) {
        std::string line;
        if (!next_line(line))
            throw NetworkParseError(std::string("unexpected end of file, expected ") + what,
                                    line_start_);
        return line;
    }

    std::size_t offset() const { return line_start_; }

private:
    const std::string& text_;
    std::size_t pos_ = 0;
    std::size_t line_start_ = 0;
};

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
}

double parse_double(const std::string& field, std::size_t offset) {
    const auto begin = field.find_first_not_of(" \t");
    if (begin == std::string::npos)
        throw NetworkParseError("empty numeric field", offset);
    const auto end = field.find_last_not_of(" \t") + 1;
    double value = 0.0;
    const auto res = std::from_chars(field.data() + begin, field.data() + end, value);
    if (res.ec != std::errc() || res.ptr != field.data() + end)
        throw NetworkParseError("bad number '" + field + "'", offset);
    if (!std::isfinite(value))
        throw NetworkParseError("non-finite value '" + field + "'", offset);
    return value;
}

std::vector<double> parse_row(Cursor& c, std::size_t expected, const char* what) {
    const std::string line = c.require_line(what);
    const auto fields = split_commas(line);
    if (fields.size() != expected)
        throw NetworkParseError(
            std::string(what) + " has " + std::to_string(fields.size()) + " fields, expected " + std::to_string(expected),
            c.offset());
    std::vector<double> out;
    out.reserve(expected);
    for (const auto& f : fields) out.push_back(parse_double(f, c.offset()));
    return out;
}

}  // namespace

NetworkParseError::NetworkParseError(const std::string& what, std::size_t byte_offset)
    : std::runtime_error(what + " (byte offset " + std::to_string(byte_offset) + ")"),
      offset_(byte_offset) {}

void NeuralNetwork::validate() const {
    if (layers.empty()) throw std::invalid_argument("network has no layers");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const Layer& layer = layers[l];
        if (layer.weights.empty()) throw std::invalid_argument("layer with no neurons");
        const std::size_t in = layer.weights.front().size();
        if (in == 0) throw std::invalid_argument("layer with zero inputs");
        for (const auto& row : layer.weights) {
            if (row.size() != in) throw std::invalid_argument("ragged weight matrix");
            for (double w : row)
                if (!std::isfinite(w)) throw std::invalid_argument("non-finite weight");
        }
        if (layer.bias.size() != layer.weights.size())
            throw std::invalid_argument("bias size does not match neuron count");
        for (double b : layer.bias)
            if (!std::isfinite(b)) throw std::invalid_argument("non-finite bias");
        if (l > 0 && layers[l - 1].out_dim() != layer.in_dim())
            throw std::invalid_argument("consecutive layer dimensions do not chain");
    }
    if (layers.back().act != Activation::Identity)
        throw std::invalid_argument("final activation must be identity");
    const std::size_t out = static_cast<std::size_t>(output_dim());
    if (const_mask.size() != out || const_values.size() != out)
        throw std::invalid_argument("constant-output mask does not match output dimension");
    for (double v : const_values)
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite constant output");
}

std::vector<double> NeuralNetwork::forward(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != input_dim())
        throw std::invalid_argument("input size does not match network input dimension");
    std::vector<double> cur(x.begin(), x.end());
    for (const Layer& layer : layers) {
        std::vector<double> next(static_cast<std::size_t>(layer.out_dim()));
        for (std::size_t j = 0; j < next.size(); ++j) {
            double acc = layer.bias[j];
            const auto& row = layer.weights[j];
            for (std::size_t i = 0; i < row.size(); ++i) acc += row[i] * cur[i];
            next[j] = layer.act == Activation::Relu ? std::max(acc, 0.0) : acc;
        }
        cur = std::move(next);
    }
    for (std::size_t i = 0; i < cur.size(); ++i)
        if (const_mask[i]) cur[i] = const_values[i];
    return cur;
}

NeuralNetwork parse_network(const std::string& text) {
    Cursor c(text);

    const std::string count_line = c.require_line("layer count");
    int num_layers = 0;
    {
        const auto begin = count_line.find_first_not_of(" \t");
        const auto end = count_line.find_last_not_of(" \t") + 1;
        const auto res =
            std::from_chars(count_line.data() + begin, count_line.data() + end, num_layers);
        if (res.ec != std::errc() || res.ptr != count_line.data() + end || num_layers < 1)
            throw NetworkParseError("bad layer count '" + count_line + "'", c.offset());
    }

    const auto size_fields = split_commas(c.require_line("layer sizes"));
    if (static_cast<int>(size_fields.size()) != num_layers + 1)
        throw NetworkParseError(
            "expected " + std::to_string(num_layers + 1) + " sizes, found " + std::to_string(size_fields.size()),
            c.offset());
    std::vector<int> sizes;
    for (const auto& f : size_fields) {
        const int s = static_cast<int>(parse_double(f, c.offset()));
        if (s < 1) throw NetworkParseError("layer size must be positive", c.offset());
        sizes.push_back(s);
    }

    const auto act_fields = split_commas(c.require_line("activation tags"));
    if (static_cast<int>(act_fields.size()) != num_layers)
        throw NetworkParseError(
            "expected " + std::to_string(num_layers) + " activation tags, found " + std::to_string(act_fields.size()),
            c.offset());
    std::vector<Activation> acts;
    for (auto f : act_fields) {
        f.erase(std::remove_if(f.begin(), f.end(), [](char ch) { return ch == ' ' || ch == '\t'; }),
                f.end());
        if (f == "relu")
            acts.push_back(Activation::Relu);
        else if (f == "identity")
            acts.push_back(Activation::Identity);
        else
            throw NetworkParseError("unknown activation '" + f + "'", c.offset());
    }

    NeuralNetwork net;
    for (int l = 0; l < num_layers; ++l) {
        Layer layer;
        layer.act = acts[static_cast<std::size_t>(l)];
        const std::size_t in = static_cast<std::size_t>(sizes[static_cast<std::size_t>(l)]);
        const std::size_t out = static_cast<std::size_t>(sizes[static_cast<std::size_t>(l) + 1]);
        for (std::size_t j = 0; j < out; ++j)
            layer.weights.push_back(parse_row(c, in, "weight row"));
        layer.bias = parse_row(c, out, "bias row");
        net.layers.push_back(std::move(layer));
    }

    const auto mask = parse_row(c, static_cast<std::size_t>(sizes.back()), "constant mask row");
    const auto consts =
        parse_row(c, static_cast<std::size_t>(sizes.back()), "constant values row");
    for (double m : mask) {
        if (m != 0.0 && m != 1.0)
            throw NetworkParseError("constant mask entries must be 0 or 1", c.offset());
        net.const_mask.push_back(m == 1.0);
    }
    net.const_values = consts;

    net.validate();
    return net;
}

NeuralNetwork load_network(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open network file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_network(buf.str());
}

std::string serialize_network(const NeuralNetwork& net) {
    net.validate();
    std::string out = std::to_string(net.layers.size()) + "\n";
    out += std::to_string(net.input_dim());
    for (const Layer& l : net.layers) out += "," + std::to_string(l.out_dim());
    out += '\n';
    for (std::size_t l = 0; l < net.layers.size(); ++l)
        out += std::string(l ? "," : "") +
               (net.layers[l].act == Activation::Relu ? "relu" : "identity");
    out += '\n';
    const auto row = [&out](const std::vector<double>& vals) {
        char buf[40];
        for (std::size_t i = 0; i < vals.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", vals[i]);
            out += std::string(i ? "," : "") + buf;
        }
        out += '\n';
    };
    for (const Layer& l : net.layers) {
        for (const auto& w : l.weights) row(w);
        row(l.bias);
    }
    std::vector<double> mask;
    for (bool m : net.const_mask) mask.push_back(m ? 1.0 : 0.0);
    row(mask);
    row(net.const_values);
    return out;
}

std::vector<std::vector<Interval>> propagate_preactivation_bounds(
    const NeuralNetwork& net, std::span<const Interval> input_box) {
    net.validate();
    if (static_cast<int>(input_box.size()) != net.input_dim())
        throw std::invalid_argument("input box size does not match network input dimension");
    for (const Interval& iv : input_box)
        if (!iv.finite()) throw std::invalid_argument("input box must be finite");

    std::vector<std::vector<Interval>> bounds;
    std::vector<Interval> cur(input_box.begin(), input_box.end());
    for (const Layer& layer : net.layers) {
        std::vector<Interval> pre(static_cast<std::size_t>(layer.out_dim()));
        for (std::size_t j = 0; j < pre.size(); ++j) {
            Interval acc(layer.bias[j]);
            const auto& row = layer.weights[j];
            for (std::size_t i = 0; i < row.size(); ++i) acc = acc + Interval(row[i]) * cur[i];
            pre[j] = acc;
        }
        bounds.push_back(pre);
        if (layer.act == Activation::Relu)
            for (Interval& iv : pre) iv = {std::max(iv.lo, 0.0), std::max(iv.hi, 0.0)};
        cur = std::move(pre);
    }
    return bounds;
}

std::vector<Interval> output_interval(const NeuralNetwork& net,
                                      std::span<const Interval> input_box) {
    const auto bounds = propagate_preactivation_bounds(net, input_box);
    std::vector<Interval> out = bounds.back();  // final activation is identity
    for (std::size_t i = 0; i < out.size(); ++i)
        if (net.const_mask[i]) out[i] = Interval(net.const_values[i]);
    return out;
}

}  // namespace overtpoly
