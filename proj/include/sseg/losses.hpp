#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "sseg/class_weights.hpp"
#include "sseg/errors.hpp"
#include "sseg/tensor.hpp"

// Masked hybrid Dice + cross-entropy loss for sparsely annotated patches and
// the unmasked variant used for fully annotated transfer tasks.
//
// Channel convention: channel 0 is background, channel c is class c. Label
// value 0 means unannotated/unknown in the sparse setting and true background
// in the fully annotated setting. The background channel never enters the
// masked loss; in the unmasked loss it participates in the CE term only.

namespace sseg {

inline constexpr double kDiceEps = 1e-5;
inline constexpr double kProbClamp = 1e-7;

struct LossBreakdown {
    double total = 0;
    double dice_term = 0;
    double ce_term = 0;
    std::map<int, double> dice_per_class;  // soft Dice_c
    std::map<int, double> cce_per_class;   // mean -log p_c over voxels labeled c
};

template <typename T>
double soft_dice_per_class(const TensorT<T>& prob, const std::vector<std::uint8_t>& labels,
                           int cls, TensorT<T>* grad_prob = nullptr, double grad_scale = 0) {
    const std::size_t C = prob.extent(0);
    const std::size_t V = prob.numel() / C;
    const T* p = prob.data() + static_cast<std::size_t>(cls) * V;
    double inter = 0, psum = 0, gsum = 0;
    for (std::size_t v = 0; v < V; ++v) {
        const double pv = p[v];
        psum += pv;
        if (labels[v] == cls) {
            inter += pv;
            gsum += 1.0;
        }
    }
    const double num = 2.0 * inter + kDiceEps;
    const double den = psum + gsum + kDiceEps;
    const double dice = num / den;
    if (grad_prob) {
        // d dice / d p_c(v) = (2 g(v) den - num) / den^2
        T* gp = grad_prob->data() + static_cast<std::size_t>(cls) * V;
        for (std::size_t v = 0; v < V; ++v) {
            const double g = labels[v] == cls ? 1.0 : 0.0;
            gp[v] += static_cast<T>(grad_scale * (2.0 * g * den - num) / (den * den));
        }
    }
    return dice;
}

// L = (1 - (1/N) sum_{c in delta} Dice_c) + sum_{c in delta} omega_c * CCE_c,
// with CCE_c the mean of -log p_c over the voxels labeled c. The background
// channel (0) is excluded from both terms; unlabeled voxels enter the Dice
// sums through p_c but never the CE term.
template <typename T>
LossBreakdown hybrid_masked_loss(const TensorT<T>& prob, const std::vector<std::uint8_t>& labels,
                                 const std::set<int>& annotated, const ClassWeights& weights,
                                 TensorT<T>* grad_prob = nullptr) {
    if (annotated.empty()) throw ConfigError("hybrid_masked_loss: empty annotated-class set");
    const std::size_t C = prob.extent(0);
    const std::size_t V = prob.numel() / C;
    if (labels.size() != V) throw ConfigError("hybrid_masked_loss: label/probability size mismatch");
    for (int c : annotated)
        if (c < 1 || static_cast<std::size_t>(c) >= C)
            throw ConfigError("hybrid_masked_loss: annotated class " + std::to_string(c) +
                              " outside foreground channel range");
    if (grad_prob) grad_prob->fill(T(0));

    LossBreakdown out;
    const double n = static_cast<double>(annotated.size());
    for (int c : annotated) {
        const double dice =
            soft_dice_per_class(prob, labels, c, grad_prob, grad_prob ? -1.0 / n : 0.0);
        out.dice_per_class[c] = dice;
        out.dice_term += dice;

        const T* p = prob.data() + static_cast<std::size_t>(c) * V;
        std::size_t count = 0;
        double ce = 0;
        for (std::size_t v = 0; v < V; ++v)
            if (labels[v] == c) {
                ++count;
                ce += -std::log(std::max(static_cast<double>(p[v]), kProbClamp));
            }
        const double cce = count ? ce / static_cast<double>(count) : 0.0;
        out.cce_per_class[c] = cce;
        const double w = weights.at(c);
        out.ce_term += w * cce;
        if (grad_prob && count) {
            T* gp = grad_prob->data() + static_cast<std::size_t>(c) * V;
            for (std::size_t v = 0; v < V; ++v)
                if (labels[v] == c) {
                    const double pv = static_cast<double>(p[v]);
                    if (pv > kProbClamp)
                        gp[v] += static_cast<T>(-w / (pv * static_cast<double>(count)));
                }
        }
    }
    out.dice_term = 1.0 - out.dice_term / n;
    out.total = out.dice_term + out.ce_term;
    return out;
}

// Unmasked loss for fully annotated tasks: soft Dice averaged over the
// foreground classes plus weighted CE over all voxels including background.
template <typename T>
LossBreakdown transfer_loss(const TensorT<T>& prob, const std::vector<std::uint8_t>& labels,
                            const ClassWeights& weights, TensorT<T>* grad_prob = nullptr) {
    const std::size_t C = prob.extent(0);
    const std::size_t V = prob.numel() / C;
    if (labels.size() != V) throw ConfigError("transfer_loss: label/probability size mismatch");
    if (grad_prob) grad_prob->fill(T(0));

    LossBreakdown out;
    const double n_fg = static_cast<double>(C - 1);
    for (std::size_t c = 1; c < C; ++c) {
        const double dice = soft_dice_per_class(prob, labels, static_cast<int>(c), grad_prob,
                                                grad_prob ? -1.0 / n_fg : 0.0);
        out.dice_per_class[static_cast<int>(c)] = dice;
        out.dice_term += dice;
    }
    out.dice_term = 1.0 - out.dice_term / n_fg;

    for (std::size_t c = 0; c < C; ++c) {
        const T* p = prob.data() + c * V;
        std::size_t count = 0;
        double ce = 0;
        for (std::size_t v = 0; v < V; ++v)
            if (labels[v] == c) {
                ++count;
                ce += -std::log(std::max(static_cast<double>(p[v]), kProbClamp));
            }
        const double cce = count ? ce / static_cast<double>(count) : 0.0;
        out.cce_per_class[static_cast<int>(c)] = cce;
        const double w = weights.at(static_cast<int>(c));
        out.ce_term += w * cce;
        if (grad_prob && count) {
            T* gp = grad_prob->data() + c * V;
            for (std::size_t v = 0; v < V; ++v)
                if (labels[v] == c) {
                    const double pv = static_cast<double>(p[v]);
                    if (pv > kProbClamp)
                        gp[v] += static_cast<T>(-w / (pv * static_cast<double>(count)));
                }
        }
    }
    out.total = out.dice_term + out.ce_term;
    return out;
}

}  // namespace sseg
