#include "sseg/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "sseg/dataset.hpp"
#include "sseg/metrics.hpp"
#include "sseg/postproc.hpp"

namespace sseg {

void TrainConfig::validate() const {
    if (learning_rates.empty()) throw ConfigError("train config: no learning rates");
    for (double lr : learning_rates)
        if (!(lr > 0)) throw ConfigError("train config: learning rates must be positive");
    if (patience < 1) throw ConfigError("train config: patience must be >= 1");
    if (max_epochs < 1) throw ConfigError("train config: epoch cap must be >= 1");
    if (stride == 0) throw ConfigError("train config: stride must be positive");
}

TrainingData load_training_data(const DatasetManifest& manifest, bool dense_weights) {
    TrainingData data;
    for (const auto* e : manifest.split_entries(Split::Train)) {
        data.train_volumes.push_back(load_volume(manifest.resolve(e->volume)));
        data.train_labels.push_back(load_labels(manifest.resolve(e->labels)));
    }
    for (const auto* e : manifest.split_entries(Split::Val)) {
        data.val_volumes.push_back(load_volume(manifest.resolve(e->volume)));
        data.val_labels.push_back(load_labels(manifest.resolve(e->labels)));
    }
    if (data.train_volumes.empty()) throw DataError("training split is empty");
    std::vector<const SparseAnnotation*> ptrs;
    for (const auto& a : data.train_labels) ptrs.push_back(&a);
    data.weights = dense_weights ? compute_dense_class_weights(ptrs, manifest.classes)
                                 : compute_class_weights(ptrs, manifest.classes);
    return data;
}

AdamState::AdamState(const Network& net, const std::vector<std::string>& trainable) {
    auto add = [&](const std::string& name) {
        const auto& shape = net.tensor(name).shape();
        moments_.emplace(name, std::make_pair(Tensor(shape), Tensor(shape)));
    };
    if (trainable.empty()) {
        for (std::size_t i = 0; i < net.size(); ++i) add(net.name(i));
    } else {
        for (const auto& name : trainable) {
            if (!net.has(name))
                throw ConfigError("adam: unknown trainable parameter '" + name + "'");
            add(name);
        }
    }
}

void AdamState::step(Network& net, const std::map<std::string, Tensor>& grads, double lr,
                     const TrainConfig& config) {
    ++t_;
    const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(t_));
    for (auto& [name, mv] : moments_) {
        const auto it = grads.find(name);
        if (it == grads.end())
            throw ConfigError("adam: missing gradient for parameter '" + name + "'");
        const Tensor& g = it->second;
        Tensor& m = mv.first;
        Tensor& v = mv.second;
        Tensor& p = net.tensor(name);
        for (std::size_t i = 0; i < g.numel(); ++i) {
            const double gi = g[i];
            if (!std::isfinite(gi))
                throw NumericError("adam: non-finite gradient in parameter '" + name + "'");
            const double mi = config.beta1 * m[i] + (1.0 - config.beta1) * gi;
            const double vi = config.beta2 * v[i] + (1.0 - config.beta2) * gi * gi;
            m[i] = static_cast<float>(mi);
            v[i] = static_cast<float>(vi);
            p[i] = static_cast<float>(p[i] -
                                      lr * (mi / bc1) / (std::sqrt(vi / bc2) + config.adam_eps));
        }
    }
}

EarlyStopper::EarlyStopper(int patience, double improvement_eps)
    : patience_(patience), eps_(improvement_eps) {
    if (patience < 1) throw ConfigError("early stopping patience must be >= 1");
}

bool EarlyStopper::observe(double metric) {
    ++epoch_;
    if (metric > best_metric_ + eps_ || best_epoch_ == 0) {
        best_metric_ = metric;
        best_epoch_ = epoch_;
        return false;
    }
    return epoch_ - best_epoch_ >= patience_;
}

namespace {

struct PatchRef {
    std::size_t volume;
    PatchOrigin origin;
};

std::vector<PatchRef> all_positive_patches(const TrainingData& data,
                                           std::size_t output_extent, std::size_t stride) {
    std::vector<PatchRef> out;
    for (std::size_t v = 0; v < data.train_volumes.size(); ++v)
        for (const PatchOrigin& o :
             positive_patch_origins(data.train_labels[v], output_extent, stride))
            out.push_back({v, o});
    return out;
}

}  // namespace

double run_epoch(Network& net, AdamState& adam, const TrainingData& data,
                 const TrainConfig& config, double lr, Rng& rng) {
    const PatchGeometry geom = compute_valid_geometry(net.spec(), config.input_extent);
    std::vector<PatchRef> patches = all_positive_patches(data, geom.output_extent, config.stride);
    if (patches.empty()) throw DataError("no positive patches in the training split");
    rng.shuffle(patches);

    double loss_sum = 0;
    for (const PatchRef& ref : patches) {
        Tensor patch = extract_input_patch(data.train_volumes[ref.volume], ref.origin,
                                           geom.input_extent, geom.output_extent);
        std::vector<std::uint8_t> labels =
            extract_label_patch(data.train_labels[ref.volume], ref.origin, geom.output_extent);
        if (config.augment_enabled) {
            const AugmentPlan plan = draw_plan(config.augment, rng);
            apply(plan, config.augment, patch, labels, geom.output_extent);
        }

        ForwardGraph<float> fg = build_forward(net, std::move(patch));
        const int loss = config.use_transfer_loss
                             ? fg.graph.transfer_loss_node(fg.prob_node, std::move(labels),
                                                           data.weights)
                             : fg.graph.hybrid_loss(
                                   fg.prob_node, std::move(labels),
                                   data.train_labels[ref.volume].annotated_classes,
                                   data.weights);
        fg.graph.backward(loss);

        std::map<std::string, Tensor> grads;
        for (const auto& [name, node] : fg.param_nodes)
            grads.emplace(name, fg.graph.grad(node));
        adam.step(net, grads, lr, config);
        loss_sum += fg.graph.value(loss)[0];
    }
    return loss_sum / static_cast<double>(patches.size());
}

double validate(const Network& net, const TrainingData& data, const TrainConfig& config) {
    if (data.val_volumes.empty()) throw DataError("validation split is empty");
    double sum = 0;
    for (std::size_t i = 0; i < data.val_volumes.size(); ++i) {
        const Volume& v = data.val_volumes[i];
        const SparseAnnotation& ref = data.val_labels[i];
        const std::size_t extent = config.inference_extent
                                       ? config.inference_extent
                                       : pick_inference_extent(net.spec(), v.extents);
        const Tensor prob = predict_volume(net, v, extent);
        const std::vector<std::uint8_t> pred = decide_labels(prob);
        double class_sum = 0;
        for (int cls : ref.annotated_classes)
            class_sum += hard_dice(pred, ref.labels, cls);
        sum += class_sum / static_cast<double>(ref.annotated_classes.size());
    }
    return sum / static_cast<double>(data.val_volumes.size());
}

TrainResult train(const Network& init, const TrainingData& data, const TrainConfig& config) {
    config.validate();
    std::ofstream log;
    if (!config.log_path.empty()) {
        log.open(config.log_path);
        if (!log) throw DataError("cannot open training log " + config.log_path);
        log << "learning_rate,epoch,train_loss,val_dice\n";
    }

    TrainResult result;
    bool have_best = false;
    Rng sweep_rng(config.seed);
    for (std::size_t li = 0; li < config.learning_rates.size(); ++li) {
        const double lr = config.learning_rates[li];
        Network net = init;
        AdamState adam(net, config.trainable);
        Rng run_rng = sweep_rng.fork(li);
        EarlyStopper stopper(config.patience, config.improvement_eps);

        TrainReport report;
        report.learning_rate = lr;
        Network run_best = net;
        for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
            const double loss = run_epoch(net, adam, data, config, lr, run_rng);
            const double dice = validate(net, data, config);
            report.epochs.push_back({epoch, loss, dice});
            if (log) log << lr << ',' << epoch << ',' << loss << ',' << dice << '\n';
            const bool stop = stopper.observe(dice);
            if (stopper.best_epoch() == epoch) run_best = net;
            report.stopping_epoch = epoch;
            if (stop) break;
        }
        report.best_epoch = stopper.best_epoch();
        report.best_val_dice = stopper.best_metric();
        result.sweep.push_back(report);

        // ties prefer the smaller learning rate, then the earlier epoch; the
        // sweep list is not assumed sorted, so compare explicitly
        const bool better =
            !have_best || report.best_val_dice > result.report.best_val_dice ||
            (report.best_val_dice == result.report.best_val_dice &&
             (lr < result.report.learning_rate ||
              (lr == result.report.learning_rate &&
               report.best_epoch < result.report.best_epoch)));
        if (better) {
            result.best = std::move(run_best);
            result.report = report;
            have_best = true;
        }
    }
    return result;
}

}  // namespace sseg
