#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <variant>
#include <vector>

#include "sseg/losses.hpp"
#include "sseg/ops.hpp"
#include "sseg/tensor.hpp"

// Reverse-mode tape. Nodes are appended in topological order (inputs must
// exist before their consumers), values are computed eagerly, and backward
// walks the tape in exact reverse order. One graph instance is
// single-threaded; tensors themselves are plain value buffers.

namespace sseg {

template <typename T>
class GraphT {
public:
    using Tensor = TensorT<T>;

    enum class Op {
        Input,
        Param,
        Conv3d,
        MaxPool3d,
        UpConv3d,
        Relu,
        SoftmaxChannel,
        ConcatCrop,
        Sum,
        Mean,
        Scale,
        HybridLoss,
        TransferLoss,
    };

    int input(Tensor v) { return push(Op::Input, {}, std::move(v)); }
    int param(Tensor v) {
        int id = push(Op::Param, {}, std::move(v));
        params_.push_back(id);
        return id;
    }

    int conv3d(int x, int w, int b) {
        return push(Op::Conv3d, {x, w, b},
                    ops::conv3d_valid(value(x), value(w), value(b)));
    }

    int maxpool(int x) {
        std::vector<std::size_t> argmax;
        Tensor v = ops::maxpool3d(value(x), &argmax);
        int id = push(Op::MaxPool3d, {x}, std::move(v));
        nodes_[id].payload = std::move(argmax);
        return id;
    }

    int upconv3d(int x, int w, int b) {
        return push(Op::UpConv3d, {x, w, b}, ops::upconv3d(value(x), value(w), value(b)));
    }

    int relu(int x) { return push(Op::Relu, {x}, ops::relu(value(x))); }

    int softmax_channel(int x) {
        return push(Op::SoftmaxChannel, {x}, ops::softmax_channel(value(x)));
    }

    int concat_crop(int skip, int up) {
        return push(Op::ConcatCrop, {skip, up}, ops::concat_crop(value(skip), value(up)));
    }

    int sum(int x) {
        T s = 0;
        for (std::size_t i = 0; i < value(x).numel(); ++i) s += value(x)[i];
        Tensor v({1});
        v[0] = s;
        return push(Op::Sum, {x}, std::move(v));
    }

    int mean(int x) {
        T s = 0;
        for (std::size_t i = 0; i < value(x).numel(); ++i) s += value(x)[i];
        Tensor v({1});
        v[0] = s / static_cast<T>(value(x).numel());
        return push(Op::Mean, {x}, std::move(v));
    }

    int scale(int x, T k) {
        Tensor v(value(x).shape());
        for (std::size_t i = 0; i < v.numel(); ++i) v[i] = k * value(x)[i];
        int id = push(Op::Scale, {x}, std::move(v));
        nodes_[id].payload = k;
        return id;
    }

    int hybrid_loss(int prob, std::vector<std::uint8_t> labels, std::set<int> annotated,
                    ClassWeights weights) {
        LossPayload payload{std::move(labels), std::move(annotated), std::move(weights), {}};
        payload.breakdown = hybrid_masked_loss(value(prob), payload.labels, payload.annotated,
                                               payload.weights);
        Tensor v({1});
        v[0] = static_cast<T>(payload.breakdown.total);
        int id = push(Op::HybridLoss, {prob}, std::move(v));
        nodes_[id].payload = std::move(payload);
        return id;
    }

    int transfer_loss_node(int prob, std::vector<std::uint8_t> labels, ClassWeights weights) {
        LossPayload payload{std::move(labels), {}, std::move(weights), {}};
        payload.breakdown = transfer_loss(value(prob), payload.labels, payload.weights);
        Tensor v({1});
        v[0] = static_cast<T>(payload.breakdown.total);
        int id = push(Op::TransferLoss, {prob}, std::move(v));
        nodes_[id].payload = std::move(payload);
        return id;
    }

    const Tensor& value(int id) const { return nodes_[id].value; }
    const Tensor& grad(int id) const { return nodes_[id].grad; }
    const std::vector<int>& param_ids() const { return params_; }

    const LossBreakdown& breakdown(int loss_id) const {
        return std::get<LossPayload>(nodes_[loss_id].payload).breakdown;
    }

    // Backpropagate from a scalar loss node. Parameters unreachable from the
    // loss keep zero gradients.
    void backward(int loss_id) {
        if (value(loss_id).numel() != 1)
            throw ConfigError("backward: loss node must be scalar, got " +
                              value(loss_id).shape_str());
        for (auto& n : nodes_) {
            n.grad = Tensor(n.value.shape());
        }
        nodes_[loss_id].grad[0] = T(1);
        for (int id = loss_id; id >= 0; --id) backward_node(id);
    }

    std::map<int, Tensor> parameter_gradients() const {
        std::map<int, Tensor> out;
        for (int id : params_) out.emplace(id, nodes_[id].grad);
        return out;
    }

private:
    struct LossPayload {
        std::vector<std::uint8_t> labels;
        std::set<int> annotated;
        ClassWeights weights;
        LossBreakdown breakdown;
    };

    struct Node {
        Op kind;
        std::vector<int> inputs;
        Tensor value;
        Tensor grad;
        std::variant<std::monostate, std::vector<std::size_t>, T, LossPayload> payload;
    };

    int push(Op kind, std::vector<int> inputs, Tensor v) {
        nodes_.push_back(Node{kind, std::move(inputs), std::move(v), {}, {}});
        return static_cast<int>(nodes_.size()) - 1;
    }

    Tensor& grad_ref(int id) { return nodes_[id].grad; }

    void backward_node(int id) {
        Node& n = nodes_[id];
        const Tensor& go = n.grad;
        switch (n.kind) {
            case Op::Input:
            case Op::Param:
                break;
            case Op::Conv3d:
                ops::conv3d_valid_backward(value(n.inputs[0]), value(n.inputs[1]), go,
                                           grad_ref(n.inputs[0]), grad_ref(n.inputs[1]),
                                           grad_ref(n.inputs[2]));
                break;
            case Op::MaxPool3d:
                ops::maxpool3d_backward(std::get<std::vector<std::size_t>>(n.payload), go,
                                        grad_ref(n.inputs[0]));
                break;
            case Op::UpConv3d:
                ops::upconv3d_backward(value(n.inputs[0]), value(n.inputs[1]), go,
                                       grad_ref(n.inputs[0]), grad_ref(n.inputs[1]),
                                       grad_ref(n.inputs[2]));
                break;
            case Op::Relu:
                ops::relu_backward(value(n.inputs[0]), go, grad_ref(n.inputs[0]));
                break;
            case Op::SoftmaxChannel:
                ops::softmax_channel_backward(n.value, go, grad_ref(n.inputs[0]));
                break;
            case Op::ConcatCrop:
                ops::concat_crop_backward(go, value(n.inputs[0]).extent(1),
                                          grad_ref(n.inputs[0]),
                                          grad_ref(n.inputs[1]));
                break;
            case Op::Sum: {
                Tensor& gi = grad_ref(n.inputs[0]);
                for (std::size_t i = 0; i < gi.numel(); ++i) gi[i] += go[0];
                break;
            }
            case Op::Mean: {
                Tensor& gi = grad_ref(n.inputs[0]);
                const T k = go[0] / static_cast<T>(gi.numel());
                for (std::size_t i = 0; i < gi.numel(); ++i) gi[i] += k;
                break;
            }
            case Op::Scale: {
                Tensor& gi = grad_ref(n.inputs[0]);
                const T k = std::get<T>(n.payload);
                for (std::size_t i = 0; i < gi.numel(); ++i) gi[i] += k * go[i];
                break;
            }
            case Op::HybridLoss: {
                const auto& p = std::get<LossPayload>(n.payload);
                Tensor gp(value(n.inputs[0]).shape());
                hybrid_masked_loss(value(n.inputs[0]), p.labels, p.annotated, p.weights, &gp);
                Tensor& gi = grad_ref(n.inputs[0]);
                for (std::size_t i = 0; i < gi.numel(); ++i) gi[i] += go[0] * gp[i];
                break;
            }
            case Op::TransferLoss: {
                const auto& p = std::get<LossPayload>(n.payload);
                Tensor gp(value(n.inputs[0]).shape());
                transfer_loss(value(n.inputs[0]), p.labels, p.weights, &gp);
                Tensor& gi = grad_ref(n.inputs[0]);
                for (std::size_t i = 0; i < gi.numel(); ++i) gi[i] += go[0] * gp[i];
                break;
            }
        }
    }

    std::vector<Node> nodes_;
    std::vector<int> params_;
};

using Graph = GraphT<float>;
using Graph64 = GraphT<double>;

}  // namespace sseg
