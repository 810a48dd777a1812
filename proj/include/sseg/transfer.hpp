#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sseg/trainer.hpp"
#include "sseg/unet.hpp"

namespace sseg {

// Weight transplant onto a smaller output head plus the three training
// strategies: from scratch, vanilla transfer, and two-phase fine-tuning.

enum class Strategy { Scratch, Vanilla, FineTune };

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);
char strategy_code(Strategy s);  // S / T / F

struct ExperimentId {
    char task = 'P';  // task code, e.g. E/V/L/P
    Strategy strategy = Strategy::Scratch;
    std::string size;  // "10", "full", ...

    std::string str() const { return std::string(1, task) + strategy_code(strategy) + size; }
};

// kFreshChannel in the class map Glorot-initializes that output row instead
// of copying one from the base model.
inline constexpr int kFreshChannel = -1;

// New network whose output convolution keeps the base's background row
// (channel 0) plus the mapped rows; everything else copies bit-exactly.
// class_map[i] is the base output channel feeding new channel i.
Network transplant(const Network& base, const NetSpec& new_spec,
                   const std::vector<int>& class_map, std::uint64_t fresh_seed = 0);

// Names of the parameters belonging to the last `k_last` parameterized
// layers in forward order (the trainability mask for fine-tuning phase 1).
std::vector<std::string> freeze_plan(const NetSpec& spec, int k_last);

struct StrategyResult {
    Network net;
    std::vector<TrainReport> reports;  // one, or two for fine-tuning's phases
};

// Runs one strategy on a training subset of `train_size` volumes (nested
// selection: smaller subsets are prefixes of larger ones under one seed).
// `base` is required for Vanilla/FineTune and must be null for Scratch.
StrategyResult run_strategy(Strategy strategy, const Network* base, const NetSpec& task_spec,
                            const std::vector<int>& class_map, const TrainingData& data,
                            std::size_t train_size, const TrainConfig& config);

// The seeded nested subset: indices into `n_train` volumes; the first
// `train_size` entries of one fixed permutation.
std::vector<std::size_t> subset_indices(std::size_t n_train, std::size_t train_size,
                                        std::uint64_t seed);

}  // namespace sseg
