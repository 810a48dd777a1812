#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sseg/augment.hpp"
#include "sseg/class_weights.hpp"
#include "sseg/rng.hpp"
#include "sseg/unet.hpp"
#include "sseg/volume.hpp"

namespace sseg {

// Optimization loop: Adam over single-patch steps, a sequential learning-rate
// sweep from one initialization, and early stopping on validation mean Dice.

struct TrainConfig {
    std::vector<double> learning_rates{1e-4, 5e-5, 1e-5};
    int patience = 10;
    int max_epochs = 200;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    std::size_t input_extent = 132;
    std::size_t stride = 30;  // voxels == mm at 1mm isotropic spacing
    bool augment_enabled = true;
    AugmentSpec augment;
    std::uint64_t seed = 0;
    double improvement_eps = 1e-5;  // "improved" means dice > best + eps
    std::size_t inference_extent = 0;  // 0: chosen per volume
    bool use_transfer_loss = false;    // unmasked loss for fully annotated tasks
    std::vector<std::string> trainable;  // parameter names; empty = all
    std::string log_path;              // optional CSV training log

    void validate() const;
};

// In-memory training corpus at 1mm isotropic spacing.
struct TrainingData {
    std::vector<Volume> train_volumes;
    std::vector<SparseAnnotation> train_labels;
    std::vector<Volume> val_volumes;
    std::vector<SparseAnnotation> val_labels;
    ClassWeights weights;
};

// With dense_weights, label 0 is treated as true background and weighted by
// inverse frequency like the foreground classes (for the unmasked loss).
TrainingData load_training_data(const DatasetManifest& manifest, bool dense_weights = false);

class AdamState {
public:
    AdamState() = default;
    // moments exist only for trainable parameters
    AdamState(const Network& net, const std::vector<std::string>& trainable = {});

    bool trains(const std::string& name) const { return moments_.count(name) != 0; }
    long steps() const { return t_; }

    void step(Network& net, const std::map<std::string, Tensor>& grads, double lr,
              const TrainConfig& config);

private:
    std::map<std::string, std::pair<Tensor, Tensor>> moments_;  // m, v
    long t_ = 0;
};

class EarlyStopper {
public:
    EarlyStopper(int patience, double improvement_eps = 1e-5);

    // feed one epoch's validation metric; returns true when training should stop
    bool observe(double metric);

    int best_epoch() const { return best_epoch_; }
    double best_metric() const { return best_metric_; }
    int epochs_seen() const { return epoch_; }

private:
    int patience_;
    double eps_;
    int epoch_ = 0;
    int best_epoch_ = 0;
    double best_metric_ = -1.0;
};

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0;
    double val_dice = 0;
};

struct TrainReport {
    double learning_rate = 0;
    std::vector<EpochRecord> epochs;
    int best_epoch = 0;
    int stopping_epoch = 0;
    double best_val_dice = 0;
};

struct TrainResult {
    Network best;
    TrainReport report;               // the chosen run
    std::vector<TrainReport> sweep;   // one report per learning rate
};

// One pass over every positive patch in a seeded shuffle, one Adam step per
// patch; returns the mean loss. Throws DataError if no patch is positive.
double run_epoch(Network& net, AdamState& adam, const TrainingData& data,
                 const TrainConfig& config, double lr, Rng& rng);

// Full-volume validation: mean over volumes of the mean hard Dice over each
// volume's annotated classes.
double validate(const Network& net, const TrainingData& data, const TrainConfig& config);

TrainResult train(const Network& init, const TrainingData& data, const TrainConfig& config);

}  // namespace sseg
