#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "sseg/checkpoint.hpp"
#include "sseg/grid.hpp"
#include "sseg/harmonize.hpp"
#include "sseg/phantom.hpp"
#include "sseg/postproc.hpp"
#include "sseg/resample.hpp"
#include "sseg/transfer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sseg;

namespace {

json load_json(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open " + path);
    try {
        return json::parse(is);
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot write " + path);
    os << content;
}

// --config file: {"net": {...}, "train": {...}, "augment": {...}}
void apply_config(const std::string& path, NetSpec& net, TrainConfig& train) {
    const json j = load_json(path);
    try {
        if (j.contains("net")) {
            const json& n = j.at("net");
            net.depth = n.value("depth", net.depth);
            net.base_filters = n.value("base_filters", net.base_filters);
            net.convs_per_level = n.value("convs_per_level", net.convs_per_level);
            net.out_classes = n.value("out_classes", net.out_classes);
        }
        if (j.contains("train")) {
            const json& t = j.at("train");
            if (t.contains("learning_rates"))
                train.learning_rates = t.at("learning_rates").get<std::vector<double>>();
            train.patience = t.value("patience", train.patience);
            train.max_epochs = t.value("max_epochs", train.max_epochs);
            train.input_extent = t.value("input_extent", train.input_extent);
            train.stride = t.value("stride", train.stride);
            train.augment_enabled = t.value("augment_enabled", train.augment_enabled);
            train.seed = t.value("seed", train.seed);
            train.inference_extent = t.value("inference_extent", train.inference_extent);
            train.use_transfer_loss = t.value("use_transfer_loss", train.use_transfer_loss);
            train.patience = t.value("patience", train.patience);
        }
        if (j.contains("augment")) {
            const json& a = j.at("augment");
            AugmentSpec& s = train.augment;
            s.probability_augmented = a.value("probability_augmented", s.probability_augmented);
            s.max_techniques = a.value("max_techniques", s.max_techniques);
            s.scale_max = a.value("scale_max", s.scale_max);
            s.rotation_max_deg = a.value("rotation_max_deg", s.rotation_max_deg);
            s.blur_sigma_min = a.value("blur_sigma_min", s.blur_sigma_min);
            s.blur_sigma_max = a.value("blur_sigma_max", s.blur_sigma_max);
            s.intensity_shift_max = a.value("intensity_shift_max", s.intensity_shift_max);
            s.elastic_control_points = a.value("elastic_control_points", s.elastic_control_points);
            s.elastic_max_shift = a.value("elastic_max_shift", s.elastic_max_shift);
            s.noise_probability = a.value("noise_probability", s.noise_probability);
            s.noise_fraction = a.value("noise_fraction", s.noise_fraction);
            s.noise_sigma = a.value("noise_sigma", s.noise_sigma);
        }
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

PhantomSpec phantom_spec_from_json(const json& j) {
    PhantomSpec spec;
    try {
        if (j.contains("extents")) {
            const auto e = j.at("extents").get<std::vector<std::size_t>>();
            if (e.size() != 3) throw ConfigError("phantom spec: extents must have 3 entries");
            spec.extents = {e[0], e[1], e[2]};
        }
        spec.background_intensity = j.value("background_intensity", spec.background_intensity);
        spec.texture_sigma = j.value("texture_sigma", spec.texture_sigma);
        spec.position_jitter = j.value("position_jitter", spec.position_jitter);
        spec.size_jitter = j.value("size_jitter", spec.size_jitter);
        spec.intensity_jitter = j.value("intensity_jitter", spec.intensity_jitter);
        spec.max_retries = j.value("max_retries", spec.max_retries);
        if (j.contains("organs")) {
            spec.organs.clear();
            for (const json& o : j.at("organs")) {
                OrganSpec organ;
                const std::string shape = o.value("shape", "ellipsoid");
                if (shape == "ellipsoid")
                    organ.shape = OrganSpec::Shape::Ellipsoid;
                else if (shape == "box")
                    organ.shape = OrganSpec::Shape::Box;
                else
                    throw ConfigError("phantom spec: unknown shape '" + shape + "'");
                const auto c = o.at("center_frac").get<std::vector<double>>();
                const auto r = o.at("radii").get<std::vector<double>>();
                if (c.size() != 3 || r.size() != 3)
                    throw ConfigError("phantom spec: center_frac/radii must have 3 entries");
                organ.center_frac = {c[0], c[1], c[2]};
                organ.radii = {r[0], r[1], r[2]};
                organ.intensity = o.at("intensity").get<double>();
                spec.organs.push_back(organ);
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("phantom spec: ") + e.what());
    }
    return spec;
}

LabelRemap remap_from_json(const json& j) {
    LabelRemap remap;
    remap.larger_x_is_left = j.value("larger_x_is_left", true);
    try {
        for (const json& r : j.at("rules")) {
            RemapRule rule;
            const std::string kind = r.at("kind").get<std::string>();
            if (kind == "merge")
                rule.kind = RemapRule::Kind::Merge;
            else if (kind == "collapse")
                rule.kind = RemapRule::Kind::Collapse;
            else if (kind == "split_laterality")
                rule.kind = RemapRule::Kind::SplitLaterality;
            else
                throw ConfigError("remap: unknown rule kind '" + kind + "'");
            rule.src = r.at("src").get<std::vector<int>>();
            rule.dst = r.value("dst", 0);
            rule.left_id = r.value("left_id", 0);
            rule.right_id = r.value("right_id", 0);
            remap.rules.push_back(rule);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("remap: ") + e.what());
    }
    return remap;
}

std::vector<int> parse_class_map(const std::string& s) {
    std::vector<int> map;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok == "fresh")
            map.push_back(kFreshChannel);
        else
            try {
                map.push_back(std::stoi(tok));
            } catch (const std::exception&) {
                throw ConfigError("class map: bad entry '" + tok + "'");
            }
    }
    return map;
}

void load_split(const DatasetManifest& m, Split split, bool prefer_ref,
                std::vector<Volume>& volumes, std::vector<SparseAnnotation>& labels,
                std::vector<std::string>* names = nullptr) {
    for (const ManifestEntry* e : m.split_entries(split)) {
        volumes.push_back(load_volume(m.resolve(e->volume)));
        const std::string& lab =
            prefer_ref && !e->ref_labels.empty() ? e->ref_labels : e->labels;
        labels.push_back(load_labels(m.resolve(lab)));
        if (names) names->push_back(e->volume);
    }
}

// ---- verbs ------------------------------------------------------------

struct PhantomArgs {
    std::string out, spec_path, pattern = "one-or-two";
    std::uint64_t seed = 0;
    int classes = 4;
    std::size_t n_train = 24, n_val = 6, n_test = 6;
};

int cmd_phantom(const PhantomArgs& a) {
    PhantomSpec spec = a.spec_path.empty() ? PhantomSpec::standard(a.classes)
                                           : phantom_spec_from_json(load_json(a.spec_path));
    const int classes = static_cast<int>(spec.organs.size());
    const std::size_t n = a.n_train + a.n_val + a.n_test;
    const auto batch = generate(spec, n, a.seed);

    std::vector<std::set<int>> pattern;
    if (a.pattern == "full") {
        std::set<int> all;
        for (int c = 1; c <= classes; ++c) all.insert(c);
        pattern.assign(a.n_train, all);
    } else if (a.pattern == "round-robin") {
        pattern = round_robin_pattern(a.n_train, classes);
    } else if (a.pattern == "one-or-two") {
        pattern = one_or_two_pattern(a.n_train, classes, a.seed);
    } else {
        throw ConfigError("phantom: unknown pattern '" + a.pattern + "'");
    }

    fs::create_directories(a.out);
    DatasetManifest manifest;
    for (int c = 1; c <= classes; ++c) manifest.classes[c] = "organ" + std::to_string(c);
    for (std::size_t i = 0; i < n; ++i) {
        std::string id = std::to_string(i);
        id.insert(0, id.size() < 3 ? 3 - id.size() : 0, '0');
        ManifestEntry e;
        e.volume = "vol_" + id + ".svol";
        e.labels = "lab_" + id + ".svol";
        e.ref_labels = "ref_" + id + ".svol";
        e.source = "phantom";
        e.split = i < a.n_train ? Split::Train : (i < a.n_train + a.n_val ? Split::Val : Split::Test);
        save_volume(a.out + "/" + e.volume, batch[i].volume);
        const SparseAnnotation train_labels = e.split == Split::Train
                                                  ? sparsify(batch[i].labels, pattern[i])
                                                  : batch[i].labels;
        save_labels(a.out + "/" + e.labels, train_labels);
        save_labels(a.out + "/" + e.ref_labels, batch[i].labels);
        manifest.entries.push_back(std::move(e));
    }
    save_manifest(a.out + "/manifest.json", manifest);
    std::cout << "wrote " << n << " phantom volumes to " << a.out << "\n";
    return 0;
}

struct PrepareArgs {
    std::string manifest, out, remap_path;
    double spacing = 1.0;
};

int cmd_prepare(const PrepareArgs& a) {
    const DatasetManifest in = load_manifest(a.manifest);
    LabelRemap remap;
    const bool do_remap = !a.remap_path.empty();
    if (do_remap) remap = remap_from_json(load_json(a.remap_path));

    fs::create_directories(a.out);
    DatasetManifest out = in;
    out.base_dir.clear();
    for (const ManifestEntry& e : in.entries) {
        Volume v = resample_volume(load_volume(in.resolve(e.volume)),
                                   {a.spacing, a.spacing, a.spacing});
        v = v.modality == Modality::CT ? normalize_ct(std::move(v))
                                       : normalize_mr(std::move(v));
        save_volume(a.out + "/" + e.volume, v);
        for (const std::string& lab : {e.labels, e.ref_labels}) {
            if (lab.empty()) continue;
            SparseAnnotation l = resample_labels(load_labels(in.resolve(lab)),
                                                 {a.spacing, a.spacing, a.spacing});
            if (do_remap) {
                std::vector<std::string> warnings;
                l = harmonize(l, remap, &warnings);
                for (const std::string& w : warnings)
                    std::cerr << "warning: " << lab << ": " << w << "\n";
            }
            save_labels(a.out + "/" + lab, l);
        }
    }
    save_manifest(a.out + "/manifest.json", out);
    std::cout << "prepared " << in.entries.size() << " volumes into " << a.out << "\n";
    return 0;
}

struct TrainBaseArgs {
    std::string manifest, out, config;
    std::uint64_t seed = 0;
};

int cmd_train_base(const TrainBaseArgs& a) {
    const DatasetManifest manifest = load_manifest(a.manifest);
    NetSpec spec;
    spec.depth = 3;
    spec.base_filters = 8;
    spec.out_classes = static_cast<int>(manifest.classes.size()) + 1;
    TrainConfig config;
    config.input_extent = 52;
    config.stride = 20;
    if (!a.config.empty()) apply_config(a.config, spec, config);
    config.seed = a.seed;

    fs::create_directories(a.out);
    config.log_path = a.out + "/train_log.csv";
    const TrainingData data = load_training_data(manifest, config.use_transfer_loss);
    const Network init = build_network(spec, config.seed);
    const TrainResult r = train(init, data, config);
    save_checkpoint(a.out + "/base.ckpt", r.best);

    nlohmann::ordered_json run;
    run["seed"] = config.seed;
    run["net"] = {{"depth", spec.depth},
                  {"base_filters", spec.base_filters},
                  {"out_classes", spec.out_classes}};
    run["learning_rate"] = r.report.learning_rate;
    run["best_epoch"] = r.report.best_epoch;
    run["best_val_dice"] = r.report.best_val_dice;
    write_text(a.out + "/run.json", run.dump(2) + "\n");
    std::cout << "best val dice " << r.report.best_val_dice << " (lr "
              << r.report.learning_rate << ", epoch " << r.report.best_epoch << ")\n";
    return 0;
}

struct TransferArgs {
    std::string base, strategy = "scratch", task, out, config, class_map;
    std::string task_code = "P";
    std::size_t train_size = 0;
    std::uint64_t seed = 0;
};

int cmd_transfer(const TransferArgs& a) {
    const Strategy strategy = strategy_from_string(a.strategy);
    const DatasetManifest manifest = load_manifest(a.task);
    Network base;
    if (!a.base.empty()) base = load_checkpoint(a.base);
    if (strategy != Strategy::Scratch && a.base.empty())
        throw ConfigError("transfer: --base is required for " + a.strategy);
    if (strategy == Strategy::Scratch && !a.base.empty())
        throw ConfigError("transfer: --base is forbidden for scratch training");

    NetSpec spec = a.base.empty() ? NetSpec{} : base.spec();
    if (a.base.empty()) {
        spec.depth = 3;
        spec.base_filters = 8;
    }
    spec.out_classes = static_cast<int>(manifest.classes.size()) + 1;
    TrainConfig config;
    config.input_extent = 52;
    config.stride = 20;
    if (!a.config.empty()) apply_config(a.config, spec, config);
    config.seed = a.seed;

    std::vector<int> class_map;
    if (!a.class_map.empty()) {
        class_map = parse_class_map(a.class_map);
    } else {
        for (int c = 0; c < spec.out_classes; ++c) class_map.push_back(c);
    }

    const TrainingData data = load_training_data(manifest, config.use_transfer_loss);
    const std::size_t size = a.train_size ? a.train_size : data.train_volumes.size();
    const StrategyResult result =
        run_strategy(strategy, a.base.empty() ? nullptr : &base, spec, class_map, data, size,
                     config);

    const ExperimentId id{a.task_code.empty() ? 'P' : a.task_code[0], strategy,
                          std::to_string(size)};
    fs::create_directories(a.out);
    save_checkpoint(a.out + "/" + id.str() + ".ckpt", result.net);

    std::vector<Volume> test_volumes;
    std::vector<SparseAnnotation> test_labels;
    std::vector<std::string> names;
    load_split(manifest, Split::Test, true, test_volumes, test_labels, &names);
    if (!test_volumes.empty()) {
        std::vector<SparseAnnotation> preds;
        std::vector<const SparseAnnotation*> pred_ptrs, ref_ptrs;
        for (std::size_t i = 0; i < test_volumes.size(); ++i) {
            const std::size_t extent = config.inference_extent
                                           ? config.inference_extent
                                           : pick_inference_extent(spec, test_volumes[i].extents);
            preds.push_back(segment_volume(result.net, test_volumes[i], extent));
        }
        for (std::size_t i = 0; i < preds.size(); ++i) {
            pred_ptrs.push_back(&preds[i]);
            ref_ptrs.push_back(&test_labels[i]);
        }
        DiceReport report = score_predictions(names, pred_ptrs, ref_ptrs);
        report.experiment = id.str();
        write_text(a.out + "/" + id.str() + ".csv", report.to_csv());
        write_text(a.out + "/" + id.str() + ".md", report.to_markdown(manifest.classes));
        std::cout << id.str() << " test dice " << report.grand_mean << "\n";
    } else {
        std::cout << id.str() << " best val dice " << result.reports.back().best_val_dice
                  << "\n";
    }
    return 0;
}

struct PredictArgs {
    std::string model, input, out;
    std::size_t extent = 0;
};

int cmd_predict(const PredictArgs& a) {
    const Network net = load_checkpoint(a.model);
    const Volume v = load_volume(a.input);
    const std::size_t extent =
        a.extent ? a.extent : pick_inference_extent(net.spec(), v.extents);
    save_labels(a.out, segment_volume(net, v, extent));
    return 0;
}

struct EvaluateArgs {
    std::string model, manifest, out, split = "test";
    std::size_t extent = 0;
};

int cmd_evaluate(const EvaluateArgs& a) {
    const Network net = load_checkpoint(a.model);
    const DatasetManifest manifest = load_manifest(a.manifest);
    std::vector<Volume> volumes;
    std::vector<SparseAnnotation> labels;
    std::vector<std::string> names;
    load_split(manifest, split_from_string(a.split), true, volumes, labels, &names);
    if (volumes.empty()) throw DataError("evaluate: split '" + a.split + "' is empty");

    std::vector<SparseAnnotation> preds;
    std::vector<const SparseAnnotation*> pred_ptrs, ref_ptrs;
    for (std::size_t i = 0; i < volumes.size(); ++i) {
        const std::size_t extent =
            a.extent ? a.extent : pick_inference_extent(net.spec(), volumes[i].extents);
        preds.push_back(segment_volume(net, volumes[i], extent));
    }
    for (std::size_t i = 0; i < preds.size(); ++i) {
        pred_ptrs.push_back(&preds[i]);
        ref_ptrs.push_back(&labels[i]);
    }
    const DiceReport report = score_predictions(names, pred_ptrs, ref_ptrs);
    std::cout << report.to_markdown(manifest.classes);
    if (!a.out.empty()) write_text(a.out, report.to_csv());
    return 0;
}

struct GridArgs {
    std::string manifest, base, out, config, class_map, strategies = "scratch,vanilla,finetune";
    std::string task_code = "P";
    std::vector<std::size_t> sizes;
    std::vector<std::uint64_t> seeds;
};

int cmd_grid(const GridArgs& a) {
    const DatasetManifest manifest = load_manifest(a.manifest);
    Network base;
    if (!a.base.empty()) base = load_checkpoint(a.base);

    GridConfig config;
    config.task_code = a.task_code.empty() ? 'P' : a.task_code[0];
    config.task_spec = a.base.empty() ? NetSpec{} : base.spec();
    if (a.base.empty()) {
        config.task_spec.depth = 3;
        config.task_spec.base_filters = 8;
    }
    config.task_spec.out_classes = static_cast<int>(manifest.classes.size()) + 1;
    config.train.input_extent = 52;
    config.train.stride = 20;
    if (!a.config.empty()) apply_config(a.config, config.task_spec, config.train);
    config.train_sizes = a.sizes;
    config.seeds = a.seeds;
    config.class_names = manifest.classes;
    config.out_dir = a.out;
    config.strategies.clear();
    std::stringstream ss(a.strategies);
    std::string tok;
    while (std::getline(ss, tok, ',')) config.strategies.push_back(strategy_from_string(tok));
    if (!a.class_map.empty()) {
        config.class_map = parse_class_map(a.class_map);
    } else {
        for (int c = 0; c < config.task_spec.out_classes; ++c) config.class_map.push_back(c);
    }

    const TrainingData data = load_training_data(manifest, config.train.use_transfer_loss);
    std::vector<Volume> test_volumes;
    std::vector<SparseAnnotation> test_labels;
    load_split(manifest, Split::Test, true, test_volumes, test_labels);

    const GridResult result = run_grid(config, a.base.empty() ? nullptr : &base, data,
                                       test_volumes, test_labels);
    std::cout << result.bar_chart_csv;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sparse-annotation volumetric segmentation toolkit"};
    app.require_subcommand(1);
    std::uint64_t global_seed = 0;
    int threads = 1;  // accepted for interface stability; execution is sequential
    std::string global_config;
    app.add_option("--seed", global_seed, "default RNG seed");
    app.add_option("--threads", threads, "worker threads (currently sequential)");
    app.add_option("--config", global_config, "JSON config file");

    PhantomArgs pa;
    CLI::App* phantom = app.add_subcommand("phantom", "generate a synthetic benchmark corpus");
    phantom->add_option("--out", pa.out, "output directory")->required();
    phantom->add_option("--spec", pa.spec_path, "phantom spec JSON");
    phantom->add_option("--seed", pa.seed, "generation seed");
    phantom->add_option("--classes", pa.classes, "foreground classes (standard spec)");
    phantom->add_option("--train", pa.n_train, "training volumes");
    phantom->add_option("--val", pa.n_val, "validation volumes");
    phantom->add_option("--test", pa.n_test, "test volumes");
    phantom->add_option("--pattern", pa.pattern, "train sparsity: full|round-robin|one-or-two");

    PrepareArgs pr;
    CLI::App* prepare = app.add_subcommand("prepare", "resample, normalize, and harmonize");
    prepare->add_option("--manifest", pr.manifest, "input dataset manifest")->required();
    prepare->add_option("--out", pr.out, "output directory")->required();
    prepare->add_option("--spacing", pr.spacing, "target isotropic spacing (mm)");
    prepare->add_option("--remap", pr.remap_path, "label remap rules JSON");

    TrainBaseArgs tb;
    CLI::App* train_base = app.add_subcommand("train-base", "train the multi-organ base model");
    train_base->add_option("--manifest", tb.manifest, "dataset manifest")->required();
    train_base->add_option("--out", tb.out, "output directory")->required();
    train_base->add_option("--config", tb.config, "JSON config file");
    train_base->add_option("--seed", tb.seed, "training seed");

    TransferArgs tr;
    CLI::App* transfer = app.add_subcommand("transfer", "train a task model with one strategy");
    transfer->add_option("--base", tr.base, "base model checkpoint");
    transfer->add_option("--strategy", tr.strategy, "scratch|vanilla|finetune");
    transfer->add_option("--task", tr.task, "task dataset manifest")->required();
    transfer->add_option("--train-size", tr.train_size, "training subset size (0 = all)");
    transfer->add_option("--seed", tr.seed, "training seed");
    transfer->add_option("--out", tr.out, "output directory")->required();
    transfer->add_option("--config", tr.config, "JSON config file");
    transfer->add_option("--class-map", tr.class_map,
                         "comma list of base output channels per task channel ('fresh' allowed)");
    transfer->add_option("--task-code", tr.task_code, "one-letter task code for the id");

    PredictArgs pd;
    CLI::App* predict = app.add_subcommand("predict", "segment one volume");
    predict->add_option("--model", pd.model, "checkpoint")->required();
    predict->add_option("--input", pd.input, "input .svol")->required();
    predict->add_option("--out", pd.out, "output label .svol")->required();
    predict->add_option("--extent", pd.extent, "inference input extent (0 = auto)");

    EvaluateArgs ev;
    CLI::App* evaluate = app.add_subcommand("evaluate", "score a model on a manifest split");
    evaluate->add_option("--model", ev.model, "checkpoint")->required();
    evaluate->add_option("--manifest", ev.manifest, "dataset manifest")->required();
    evaluate->add_option("--split", ev.split, "train|val|test");
    evaluate->add_option("--out", ev.out, "CSV report path");
    evaluate->add_option("--extent", ev.extent, "inference input extent (0 = auto)");

    GridArgs gr;
    CLI::App* grid = app.add_subcommand("grid", "run the strategy x size experiment grid");
    grid->add_option("--manifest", gr.manifest, "task dataset manifest")->required();
    grid->add_option("--base", gr.base, "base model checkpoint");
    grid->add_option("--out", gr.out, "output directory")->required();
    grid->add_option("--config", gr.config, "JSON config file");
    grid->add_option("--strategies", gr.strategies, "comma list of strategies");
    grid->add_option("--sizes", gr.sizes, "training sizes")->delimiter(',')->required();
    grid->add_option("--seeds", gr.seeds, "seeds")->delimiter(',')->required();
    grid->add_option("--class-map", gr.class_map, "transplant class map");
    grid->add_option("--task-code", gr.task_code, "one-letter task code");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : ConfigError::exit_code;
    }

    try {
        // verb-level seeds default to the global one when unset
        if (!phantom->count("--seed")) pa.seed = global_seed;
        if (!train_base->count("--seed")) tb.seed = global_seed;
        if (!transfer->count("--seed")) tr.seed = global_seed;
        if (tb.config.empty()) tb.config = global_config;
        if (tr.config.empty()) tr.config = global_config;
        if (gr.config.empty()) gr.config = global_config;

        if (phantom->parsed()) return cmd_phantom(pa);
        if (prepare->parsed()) return cmd_prepare(pr);
        if (train_base->parsed()) return cmd_train_base(tb);
        if (transfer->parsed()) return cmd_transfer(tr);
        if (predict->parsed()) return cmd_predict(pd);
        if (evaluate->parsed()) return cmd_evaluate(ev);
        if (grid->parsed()) return cmd_grid(gr);
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return NumericError::exit_code;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return DataError::exit_code;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return ConfigError::exit_code;
    }
    return 0;
}
