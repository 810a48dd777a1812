#include <cmath>
#include <vector>

#include "doctest.h"
#include "sseg/losses.hpp"
#include "sseg/rng.hpp"

using namespace sseg;

namespace {

// per-voxel softmax over random logits: a valid probability field
Tensor64 random_prob(std::size_t C, std::size_t e, Rng& rng) {
    Tensor64 p({C, e, e, e});
    const std::size_t V = e * e * e;
    for (std::size_t v = 0; v < V; ++v) {
        double sum = 0;
        for (std::size_t c = 0; c < C; ++c) {
            const double x = std::exp(rng.uniform(-2, 2));
            p[c * V + v] = x;
            sum += x;
        }
        for (std::size_t c = 0; c < C; ++c) p[c * V + v] /= sum;
    }
    return p;
}

std::vector<std::uint8_t> random_labels(std::size_t V, int max_label, Rng& rng) {
    std::vector<std::uint8_t> l(V);
    for (auto& x : l) x = static_cast<std::uint8_t>(rng.below(max_label + 1));
    return l;
}

}  // namespace

TEST_CASE("soft dice closed forms") {
    const std::size_t e = 4, V = e * e * e;

    SUBCASE("perfect binary overlap is 1 within epsilon effects") {
        Tensor64 p({2, e, e, e});
        std::vector<std::uint8_t> labels(V, 0);
        for (std::size_t v = 0; v < V / 2; ++v) labels[v] = 1;
        for (std::size_t v = 0; v < V; ++v) {
            p[v] = labels[v] == 1 ? 0.0 : 1.0;
            p[V + v] = labels[v] == 1 ? 1.0 : 0.0;
        }
        CHECK(soft_dice_per_class(p, labels, 1) == doctest::Approx(1.0).epsilon(1e-6));
    }

    SUBCASE("disjoint prediction and reference is ~0") {
        Tensor64 p({2, e, e, e});
        std::vector<std::uint8_t> labels(V, 0);
        for (std::size_t v = 0; v < V / 2; ++v) labels[v] = 1;
        for (std::size_t v = 0; v < V; ++v) p[V + v] = labels[v] == 1 ? 0.0 : 1.0;
        CHECK(soft_dice_per_class(p, labels, 1) < 1e-4);
    }

    SUBCASE("p=0.5 everywhere, half the voxels labeled -> 0.5") {
        Tensor64 p({2, e, e, e});
        std::vector<std::uint8_t> labels(V, 0);
        for (std::size_t v = 0; v < V / 2; ++v) labels[v] = 1;
        for (std::size_t v = 0; v < V; ++v) {
            p[v] = 0.5;
            p[V + v] = 0.5;
        }
        // (2 * 0.25V) / (0.5V + 0.5V) = 0.5
        CHECK(soft_dice_per_class(p, labels, 1) == doctest::Approx(0.5).epsilon(1e-4));
    }
}

TEST_CASE("hybrid loss vanishes at the optimum") {
    const std::size_t e = 4, V = e * e * e;
    Tensor64 p({3, e, e, e});
    std::vector<std::uint8_t> labels(V);
    for (std::size_t v = 0; v < V; ++v) labels[v] = static_cast<std::uint8_t>(1 + v % 2);
    for (std::size_t v = 0; v < V; ++v) {
        p[V + v] = labels[v] == 1 ? 1.0 : 0.0;
        p[2 * V + v] = labels[v] == 2 ? 1.0 : 0.0;
    }
    const LossBreakdown b = hybrid_masked_loss(p, labels, {1, 2}, ClassWeights{});
    CHECK(b.dice_term == doctest::Approx(0.0).epsilon(1e-5));
    CHECK(b.ce_term == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(b.total == doctest::Approx(0.0).epsilon(1e-5));
}

TEST_CASE("probability clamp caps the cross entropy at -log(1e-7)") {
    const std::size_t e = 2, V = e * e * e;
    Tensor64 p({2, e, e, e});  // p_1 == 0 everywhere
    std::vector<std::uint8_t> labels(V, 1);
    const LossBreakdown b = hybrid_masked_loss(p, labels, {1}, ClassWeights{});
    CHECK(b.ce_term == doctest::Approx(-std::log(1e-7)).epsilon(1e-9));
    CHECK(b.ce_term == doctest::Approx(16.12).epsilon(1e-3));
}

TEST_CASE("dice term arithmetic: classes at 1.0 and 0.5 give 0.25") {
    const std::size_t e = 4, V = e * e * e;
    Tensor64 p({3, e, e, e});
    std::vector<std::uint8_t> labels(V);
    // class 1 on the first half (predicted perfectly), class 2 on the second
    // half but predicted at 0.5 everywhere -> Dice_2 = 0.5
    for (std::size_t v = 0; v < V; ++v) {
        labels[v] = static_cast<std::uint8_t>(v < V / 2 ? 1 : 2);
        p[V + v] = v < V / 2 ? 1.0 : 0.0;
        p[2 * V + v] = 0.5;
    }
    const LossBreakdown b = hybrid_masked_loss(p, labels, {1, 2}, ClassWeights{});
    CHECK(b.dice_per_class.at(1) == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(b.dice_per_class.at(2) == doctest::Approx(0.5).epsilon(1e-4));
    CHECK(b.dice_term == doctest::Approx(0.25).epsilon(1e-4));
    CHECK(b.total == doctest::Approx(b.dice_term + b.ce_term).epsilon(1e-6));
}

TEST_CASE("masking invariance: non-annotated channels never matter") {
    Rng rng(31);
    const std::size_t C = 5, e = 4, V = e * e * e;
    Tensor64 p = random_prob(C, e, rng);
    std::vector<std::uint8_t> labels(V, 0);
    for (std::size_t v = 0; v < V; ++v)
        if (rng.uniform() < 0.5) labels[v] = static_cast<std::uint8_t>(1 + rng.below(2));
    const ClassWeights w{{{1, 0.7}, {2, 1.3}}};

    const LossBreakdown before = hybrid_masked_loss(p, labels, {1, 2}, w);
    // scribble over the background channel and the non-annotated classes 3, 4
    for (std::size_t v = 0; v < V; ++v) {
        p[v] = rng.uniform();
        p[3 * V + v] = rng.uniform();
        p[4 * V + v] = rng.uniform();
    }
    const LossBreakdown after = hybrid_masked_loss(p, labels, {1, 2}, w);
    CHECK(after.total == before.total);
    CHECK(after.dice_term == before.dice_term);
    CHECK(after.ce_term == before.ce_term);
    CHECK(before.dice_per_class.count(3) == 0);
    CHECK(before.cce_per_class.count(4) == 0);
}

TEST_CASE("hybrid loss bounds and usage errors") {
    Rng rng(17);
    Tensor64 p = random_prob(4, 4, rng);
    std::vector<std::uint8_t> labels = random_labels(64, 3, rng);
    const LossBreakdown b = hybrid_masked_loss(p, labels, {1, 2, 3}, ClassWeights{});
    CHECK(b.dice_term >= 0.0);
    CHECK(b.dice_term <= 1.0);
    CHECK(b.ce_term >= 0.0);

    CHECK_THROWS_AS(hybrid_masked_loss(p, labels, {}, ClassWeights{}), ConfigError);
    CHECK_THROWS_AS(hybrid_masked_loss(p, labels, {0}, ClassWeights{}), ConfigError);
    CHECK_THROWS_AS(hybrid_masked_loss(p, labels, {4}, ClassWeights{}), ConfigError);
}

TEST_CASE("hybrid loss gradient matches central differences at the probability level") {
    Rng rng(23);
    const std::size_t C = 4, e = 4, V = e * e * e;
    Tensor64 p = random_prob(C, e, rng);
    std::vector<std::uint8_t> labels = random_labels(V, 3, rng);
    const ClassWeights w{{{1, 0.5}, {2, 1.0}, {3, 1.5}}};
    Tensor64 grad({C, e, e, e});
    hybrid_masked_loss(p, labels, {1, 2, 3}, w, &grad);

    const double h = 1e-6;
    for (int s = 0; s < 80; ++s) {
        const std::size_t i = rng.below(p.numel());
        const double saved = p[i];
        p[i] = saved + h;
        const double up = hybrid_masked_loss(p, labels, {1, 2, 3}, w).total;
        p[i] = saved - h;
        const double dn = hybrid_masked_loss(p, labels, {1, 2, 3}, w).total;
        p[i] = saved;
        const double fd = (up - dn) / (2 * h);
        CHECK(std::abs(grad[i] - fd) <
              1e-5 * std::max({std::abs(grad[i]), std::abs(fd), 1e-8}) + 1e-9);
    }
}

TEST_CASE("transfer loss vanishes for a perfect one-hot prediction") {
    const std::size_t e = 4, V = e * e * e;
    Tensor64 p({3, e, e, e});
    std::vector<std::uint8_t> labels(V);
    for (std::size_t v = 0; v < V; ++v) {
        labels[v] = static_cast<std::uint8_t>(v % 3);
        p[static_cast<std::size_t>(labels[v]) * V + v] = 1.0;
    }
    const LossBreakdown b = transfer_loss(p, labels, ClassWeights{});
    CHECK(b.dice_term == doctest::Approx(0.0).epsilon(1e-5));
    CHECK(b.ce_term == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("transfer loss CE under uniform prediction is sum of w_c log C") {
    const std::size_t C = 4, e = 4, V = e * e * e;
    Tensor64 p = Tensor64::full({C, e, e, e}, 1.0 / C);
    std::vector<std::uint8_t> labels(V);
    for (std::size_t v = 0; v < V; ++v) labels[v] = static_cast<std::uint8_t>(v % C);
    const ClassWeights w{{{0, 0.5}, {1, 0.75}, {2, 1.25}, {3, 1.5}}};
    const LossBreakdown b = transfer_loss(p, labels, w);
    CHECK(b.ce_term == doctest::Approx((0.5 + 0.75 + 1.25 + 1.5) * std::log(4.0)).epsilon(1e-9));
    // background participates in the CE term but never the Dice term
    CHECK(b.cce_per_class.count(0) == 1);
    CHECK(b.dice_per_class.count(0) == 0);
}

TEST_CASE("transfer loss gradient matches central differences") {
    Rng rng(29);
    const std::size_t C = 3, e = 4, V = e * e * e;
    Tensor64 p = random_prob(C, e, rng);
    std::vector<std::uint8_t> labels = random_labels(V, 2, rng);
    const ClassWeights w{{{0, 0.8}, {1, 1.1}, {2, 1.1}}};
    Tensor64 grad({C, e, e, e});
    transfer_loss(p, labels, w, &grad);

    const double h = 1e-6;
    for (int s = 0; s < 60; ++s) {
        const std::size_t i = rng.below(p.numel());
        const double saved = p[i];
        p[i] = saved + h;
        const double up = transfer_loss(p, labels, w).total;
        p[i] = saved - h;
        const double dn = transfer_loss(p, labels, w).total;
        p[i] = saved;
        const double fd = (up - dn) / (2 * h);
        CHECK(std::abs(grad[i] - fd) <
              1e-5 * std::max({std::abs(grad[i]), std::abs(fd), 1e-8}) + 1e-9);
    }
}

TEST_CASE("single-foreground transfer task reduces to binary dice plus CE") {
    Rng rng(37);
    const std::size_t e = 4, V = e * e * e;
    Tensor64 p = random_prob(2, e, rng);
    std::vector<std::uint8_t> labels = random_labels(V, 1, rng);
    const LossBreakdown b = transfer_loss(p, labels, ClassWeights{});
    CHECK(b.dice_term ==
          doctest::Approx(1.0 - soft_dice_per_class(p, labels, 1)).epsilon(1e-12));
    CHECK(b.total == doctest::Approx(b.dice_term + b.ce_term).epsilon(1e-6));
}
