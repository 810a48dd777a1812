#include "sseg/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace sseg {

std::string to_string(Strategy s) {
    switch (s) {
        case Strategy::Scratch: return "scratch";
        case Strategy::Vanilla: return "vanilla";
        case Strategy::FineTune: return "finetune";
    }
    throw ConfigError("unknown strategy");
}

Strategy strategy_from_string(const std::string& s) {
    if (s == "scratch") return Strategy::Scratch;
    if (s == "vanilla") return Strategy::Vanilla;
    if (s == "finetune") return Strategy::FineTune;
    throw ConfigError("unknown strategy '" + s + "' (expected scratch|vanilla|finetune)");
}

char strategy_code(Strategy s) {
    switch (s) {
        case Strategy::Scratch: return 'S';
        case Strategy::Vanilla: return 'T';
        case Strategy::FineTune: return 'F';
    }
    throw ConfigError("unknown strategy");
}

Network transplant(const Network& base, const NetSpec& new_spec,
                   const std::vector<int>& class_map, std::uint64_t fresh_seed) {
    const NetSpec& bs = base.spec();
    std::ostringstream mismatch;
    if (bs.depth != new_spec.depth) mismatch << " depth(" << bs.depth << " vs " << new_spec.depth << ")";
    if (bs.base_filters != new_spec.base_filters)
        mismatch << " base_filters(" << bs.base_filters << " vs " << new_spec.base_filters << ")";
    if (bs.convs_per_level != new_spec.convs_per_level)
        mismatch << " convs_per_level(" << bs.convs_per_level << " vs " << new_spec.convs_per_level
                 << ")";
    if (bs.in_channels != new_spec.in_channels)
        mismatch << " in_channels(" << bs.in_channels << " vs " << new_spec.in_channels << ")";
    if (!mismatch.str().empty())
        throw ConfigError("transplant: architecture mismatch:" + mismatch.str());
    if (class_map.size() != static_cast<std::size_t>(new_spec.out_classes))
        throw ConfigError("transplant: class map length " + std::to_string(class_map.size()) +
                          " != out_classes " + std::to_string(new_spec.out_classes));
    if (class_map.empty() || class_map[0] != 0)
        throw ConfigError("transplant: the background channel (0) must map to itself");
    for (int src : class_map)
        if (src != kFreshChannel && (src < 0 || src >= bs.out_classes))
            throw ConfigError("transplant: source channel " + std::to_string(src) +
                              " outside the base model's range");

    const Tensor& base_w = base.tensor("out.weight");  // [C_base, cin, 1, 1, 1]
    const Tensor& base_b = base.tensor("out.bias");
    const std::size_t cin = base_w.extent(1);
    const std::size_t C_new = class_map.size();

    Tensor w({C_new, cin, 1, 1, 1});
    Tensor b({C_new});
    Rng rng(fresh_seed);
    const double a = std::sqrt(6.0 / static_cast<double>(cin + C_new));
    for (std::size_t c = 0; c < C_new; ++c) {
        if (class_map[c] == kFreshChannel) {
            for (std::size_t i = 0; i < cin; ++i)
                w.at(c, i, 0, 0) = static_cast<float>(rng.uniform(-a, a));
            b[c] = 0.0f;
        } else {
            const std::size_t src = static_cast<std::size_t>(class_map[c]);
            for (std::size_t i = 0; i < cin; ++i) w.at(c, i, 0, 0) = base_w.at(src, i, 0, 0);
            b[c] = base_b[src];
        }
    }

    std::vector<std::pair<std::string, Tensor>> params;
    for (std::size_t i = 0; i < base.size(); ++i) {
        const std::string& name = base.name(i);
        if (name == "out.weight")
            params.emplace_back(name, w);
        else if (name == "out.bias")
            params.emplace_back(name, b);
        else
            params.emplace_back(name, base.tensor(i));
    }
    return Network(new_spec, std::move(params));
}

std::vector<std::string> freeze_plan(const NetSpec& spec, int k_last) {
    const std::vector<std::string> layers = layer_names(spec);
    if (k_last < 1) throw ConfigError("freeze plan: layer count must be >= 1");
    if (static_cast<std::size_t>(k_last) > layers.size())
        throw ConfigError("freeze plan: only " + std::to_string(layers.size()) +
                          " parameterized layers exist");
    std::vector<std::string> trainable;
    for (std::size_t i = layers.size() - static_cast<std::size_t>(k_last); i < layers.size(); ++i) {
        trainable.push_back(layers[i] + ".weight");
        trainable.push_back(layers[i] + ".bias");
    }
    return trainable;
}

std::vector<std::size_t> subset_indices(std::size_t n_train, std::size_t train_size,
                                        std::uint64_t seed) {
    if (train_size > n_train)
        throw DataError("training subset of " + std::to_string(train_size) +
                        " volumes requested but only " + std::to_string(n_train) + " available");
    std::vector<std::size_t> order(n_train);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed ^ 0x5b5e7150a11ull);
    rng.shuffle(order);
    order.resize(train_size);
    return order;
}

namespace {

TrainingData select_subset(const TrainingData& data, const std::vector<std::size_t>& indices) {
    TrainingData out;
    for (std::size_t i : indices) {
        out.train_volumes.push_back(data.train_volumes[i]);
        out.train_labels.push_back(data.train_labels[i]);
    }
    out.val_volumes = data.val_volumes;
    out.val_labels = data.val_labels;
    out.weights = data.weights;
    return out;
}

}  // namespace

StrategyResult run_strategy(Strategy strategy, const Network* base, const NetSpec& task_spec,
                            const std::vector<int>& class_map, const TrainingData& data,
                            std::size_t train_size, const TrainConfig& config) {
    if (strategy == Strategy::Scratch && base)
        throw ConfigError("run_strategy: scratch training must not receive a base model");
    if (strategy != Strategy::Scratch && !base)
        throw ConfigError("run_strategy: " + to_string(strategy) + " requires a base model");

    const TrainingData subset =
        select_subset(data, subset_indices(data.train_volumes.size(), train_size, config.seed));

    StrategyResult out;
    switch (strategy) {
        case Strategy::Scratch: {
            const Network init = build_network(task_spec, config.seed);
            TrainResult r = train(init, subset, config);
            out.net = std::move(r.best);
            out.reports.push_back(std::move(r.report));
            break;
        }
        case Strategy::Vanilla: {
            const Network init = transplant(*base, task_spec, class_map, config.seed);
            TrainResult r = train(init, subset, config);
            out.net = std::move(r.best);
            out.reports.push_back(std::move(r.report));
            break;
        }
        case Strategy::FineTune: {
            const Network init = transplant(*base, task_spec, class_map, config.seed);
            TrainConfig phase1 = config;
            phase1.trainable = freeze_plan(task_spec, 3);
            TrainResult r1 = train(init, subset, phase1);
            out.reports.push_back(std::move(r1.report));

            // phase 2: everything trainable again, fresh Adam moments
            TrainConfig phase2 = config;
            phase2.seed = config.seed ^ 0x9e3779b97f4a7c15ull;
            TrainResult r2 = train(r1.best, subset, phase2);
            out.net = std::move(r2.best);
            out.reports.push_back(std::move(r2.report));
            break;
        }
    }
    return out;
}

}  // namespace sseg
