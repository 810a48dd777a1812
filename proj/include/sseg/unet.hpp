#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sseg/graph.hpp"
#include "sseg/rng.hpp"
#include "sseg/tensor.hpp"

// Batch-norm-free 3D U-Net with valid convolutions: `depth` resolutions,
// two 3x3x3 convolutions per level on both paths, 2x2x2 max pooling, and a
// stride-2 transposed convolution decoder. The output layer is a 1x1x1
// convolution to `out_classes` followed by a channel softmax.

namespace sseg {

struct NetSpec {
    int depth = 4;
    int base_filters = 32;
    int convs_per_level = 2;
    int in_channels = 1;
    int out_classes = 23;

    int filters_at(int level) const { return base_filters << level; }

    bool operator==(const NetSpec&) const = default;
};

struct PatchGeometry {
    std::size_t input_extent = 0;
    std::size_t output_extent = 0;
    // extent after the conv pair at each encoder level, shallow to deep;
    // the last entry is the bottom level
    std::vector<std::size_t> encoder_extents;
    // extent after the conv pair at each decoder level, deep to shallow
    std::vector<std::size_t> decoder_extents;
    // crop margin applied to the skip tensor at each decoder level, deep to shallow
    std::vector<std::size_t> crop_margins;
};

PatchGeometry compute_valid_geometry(const NetSpec& spec, std::size_t input_extent);

// Smallest feasible input extent >= `at_least` for this spec.
std::size_t min_feasible_extent(const NetSpec& spec, std::size_t at_least = 1);

template <typename T>
class NetworkT {
public:
    NetworkT() = default;
    NetworkT(NetSpec spec, std::vector<std::pair<std::string, TensorT<T>>> params)
        : spec_(spec), params_(std::move(params)) {
        for (std::size_t i = 0; i < params_.size(); ++i) index_[params_[i].first] = i;
    }

    const NetSpec& spec() const { return spec_; }
    std::size_t size() const { return params_.size(); }
    const std::string& name(std::size_t i) const { return params_[i].first; }
    TensorT<T>& tensor(std::size_t i) { return params_[i].second; }
    const TensorT<T>& tensor(std::size_t i) const { return params_[i].second; }

    bool has(const std::string& name) const { return index_.count(name) != 0; }
    TensorT<T>& tensor(const std::string& name) { return params_[index_.at(name)].second; }
    const TensorT<T>& tensor(const std::string& name) const {
        return params_[index_.at(name)].second;
    }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& [_, t] : params_) n += t.numel();
        return n;
    }

    template <typename U>
    NetworkT<U> cast() const {
        std::vector<std::pair<std::string, TensorT<U>>> ps;
        ps.reserve(params_.size());
        for (const auto& [name, t] : params_) ps.emplace_back(name, t.template cast<U>());
        return NetworkT<U>(spec_, std::move(ps));
    }

private:
    NetSpec spec_;
    std::vector<std::pair<std::string, TensorT<T>>> params_;
    std::map<std::string, std::size_t> index_;
};

using Network = NetworkT<float>;

// Parameter names in forward order for a given spec:
// enc{L}.conv{i}, dec{L}.up, dec{L}.conv{i}, out -- each with .weight/.bias.
std::vector<std::string> layer_names(const NetSpec& spec);

Network build_network(const NetSpec& spec, std::uint64_t seed);

template <typename T>
struct ForwardGraph {
    GraphT<T> graph;
    int input_node = -1;
    int prob_node = -1;
    std::map<std::string, int> param_nodes;  // parameter name -> node id
};

// Assembles the forward pass on a fresh tape. Throws GeometryError for
// infeasible patch extents.
template <typename T>
ForwardGraph<T> build_forward(const NetworkT<T>& net, TensorT<T> patch) {
    const NetSpec& spec = net.spec();
    if (patch.rank() != 4 || patch.extent(0) != static_cast<std::size_t>(spec.in_channels))
        throw ConfigError("forward: expected patch with " + std::to_string(spec.in_channels) +
                          " channel(s)");
    if (patch.extent(1) != patch.extent(2) || patch.extent(1) != patch.extent(3))
        throw GeometryError("forward: expected a cubic patch, got " + patch.shape_str());
    compute_valid_geometry(spec, patch.extent(1));  // validates, throws on infeasible

    ForwardGraph<T> fg;
    GraphT<T>& g = fg.graph;
    auto p = [&](const std::string& name) {
        auto it = fg.param_nodes.find(name);
        if (it != fg.param_nodes.end()) return it->second;
        int id = g.param(net.tensor(name));
        fg.param_nodes[name] = id;
        return id;
    };
    auto conv_block = [&](int x, const std::string& prefix) {
        for (int i = 0; i < spec.convs_per_level; ++i) {
            const std::string base = prefix + ".conv" + std::to_string(i);
            x = g.relu(g.conv3d(x, p(base + ".weight"), p(base + ".bias")));
        }
        return x;
    };

    // intensities arrive in the harmonized [-500, 400] HU window; rescale to
    // [-1, 1] so Glorot-scale weights yield O(1) logits instead of saturating
    // the softmax
    for (std::size_t i = 0; i < patch.numel(); ++i)
        patch[i] = (patch[i] + T(50)) / T(450);
    fg.input_node = g.input(std::move(patch));
    std::vector<int> skips;
    int x = fg.input_node;
    for (int level = 0; level < spec.depth; ++level) {
        if (level > 0) x = g.maxpool(x);
        x = conv_block(x, "enc" + std::to_string(level));
        if (level + 1 < spec.depth) skips.push_back(x);
    }
    for (int level = spec.depth - 2; level >= 0; --level) {
        const std::string prefix = "dec" + std::to_string(level);
        int up = g.upconv3d(x, p(prefix + ".up.weight"), p(prefix + ".up.bias"));
        x = conv_block(g.concat_crop(skips[level], up), prefix);
    }
    int logits = g.conv3d(x, p("out.weight"), p("out.bias"));
    fg.prob_node = g.softmax_channel(logits);
    return fg;
}

template <typename T>
TensorT<T> forward(const NetworkT<T>& net, TensorT<T> patch) {
    auto fg = build_forward(net, std::move(patch));
    return fg.graph.value(fg.prob_node);
}

}  // namespace sseg
