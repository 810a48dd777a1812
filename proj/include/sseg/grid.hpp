#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sseg/metrics.hpp"
#include "sseg/transfer.hpp"

namespace sseg {

// The (strategy x training-size x seed) experiment grid: trains one model per
// cell, scores it on a held-out test split, and aggregates into per-experiment
// reports plus learning-curve, bar-chart, and JSON summary artifacts.

struct GridConfig {
    char task_code = 'P';
    NetSpec task_spec;
    std::vector<int> class_map;  // for Vanilla/FineTune transplants
    std::vector<Strategy> strategies{Strategy::Scratch, Strategy::Vanilla, Strategy::FineTune};
    std::vector<std::size_t> train_sizes;
    std::vector<std::uint64_t> seeds;
    TrainConfig train;  // its seed field is overridden per cell
    std::map<int, std::string> class_names;
    std::string out_dir;  // empty: keep everything in memory only

    void validate() const;
};

struct GridCell {
    ExperimentId id;
    std::uint64_t seed = 0;
    double test_dice = 0;  // grand mean over the test split
    std::vector<TrainReport> reports;
};

struct GridResult {
    std::vector<GridCell> cells;               // grid order: strategy, size, seed
    std::map<std::string, DiceReport> reports; // per ExperimentId, pooled over seeds
    std::string learning_curve_csv;            // per-cell rows
    std::string bar_chart_csv;                 // mean +- sigma per experiment
    std::string summary_json;

    double mean_dice(Strategy strategy, std::size_t size) const;
};

// `base` is required iff the strategy list needs one. With out_dir set, writes
// one checkpoint and report per experiment plus the three summary files;
// reruns with identical inputs are byte-identical.
GridResult run_grid(const GridConfig& config, const Network* base, const TrainingData& data,
                    const std::vector<Volume>& test_volumes,
                    const std::vector<SparseAnnotation>& test_labels);

}  // namespace sseg
