#include "sseg/grid.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "sseg/checkpoint.hpp"
#include "sseg/postproc.hpp"

#include "json.hpp"

namespace sseg {

namespace {

bool needs_base(const std::vector<Strategy>& strategies) {
    for (Strategy s : strategies)
        if (s != Strategy::Scratch) return true;
    return false;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot write " + path);
    os << content;
}

}  // namespace

void GridConfig::validate() const {
    train.validate();
    if (strategies.empty()) throw ConfigError("grid: no strategies");
    if (train_sizes.empty()) throw ConfigError("grid: no training sizes");
    if (seeds.empty()) throw ConfigError("grid: no seeds");
}

double GridResult::mean_dice(Strategy strategy, std::size_t size) const {
    double sum = 0;
    std::size_t n = 0;
    for (const GridCell& c : cells)
        if (c.id.strategy == strategy && c.id.size == std::to_string(size)) {
            sum += c.test_dice;
            ++n;
        }
    if (n == 0) throw ConfigError("grid: no cells for the requested (strategy, size)");
    return sum / static_cast<double>(n);
}

GridResult run_grid(const GridConfig& config, const Network* base, const TrainingData& data,
                    const std::vector<Volume>& test_volumes,
                    const std::vector<SparseAnnotation>& test_labels) {
    config.validate();
    if (test_volumes.size() != test_labels.size() || test_volumes.empty())
        throw DataError("grid: empty or mismatched test split");
    if (needs_base(config.strategies) && !base)
        throw ConfigError("grid: the strategy list requires a base model");

    if (!config.out_dir.empty()) std::filesystem::create_directories(config.out_dir);

    GridResult result;
    std::ostringstream curve;
    curve << std::setprecision(9);
    curve << "task,strategy,size,seed,test_dice\n";

    for (Strategy strategy : config.strategies)
        for (std::size_t size : config.train_sizes) {
            const ExperimentId id{config.task_code, strategy, std::to_string(size)};
            DiceReport pooled;
            pooled.experiment = id.str();
            const Network* last_net = nullptr;
            Network kept;

            for (std::uint64_t seed : config.seeds) {
                TrainConfig train = config.train;
                train.seed = seed;
                StrategyResult run =
                    run_strategy(strategy, strategy == Strategy::Scratch ? nullptr : base,
                                 config.task_spec, config.class_map, data, size, train);

                std::vector<SparseAnnotation> predictions;
                std::vector<const SparseAnnotation*> pred_ptrs, ref_ptrs;
                std::vector<std::string> names;
                for (std::size_t i = 0; i < test_volumes.size(); ++i) {
                    const std::size_t extent =
                        train.inference_extent
                            ? train.inference_extent
                            : pick_inference_extent(config.task_spec, test_volumes[i].extents);
                    predictions.push_back(segment_volume(run.net, test_volumes[i], extent));
                }
                for (std::size_t i = 0; i < test_volumes.size(); ++i) {
                    pred_ptrs.push_back(&predictions[i]);
                    ref_ptrs.push_back(&test_labels[i]);
                    names.push_back("s" + std::to_string(seed) + "/v" + std::to_string(i));
                }
                DiceReport scored = score_predictions(names, pred_ptrs, ref_ptrs);

                GridCell cell;
                cell.id = id;
                cell.seed = seed;
                cell.test_dice = scored.grand_mean;
                cell.reports = std::move(run.reports);
                curve << config.task_code << ',' << to_string(strategy) << ',' << size << ','
                      << seed << ',' << cell.test_dice << '\n';
                result.cells.push_back(std::move(cell));
                for (VolumeDice& v : scored.volumes) pooled.volumes.push_back(std::move(v));

                kept = std::move(run.net);
                last_net = &kept;
            }

            pooled.finalize();
            if (!config.out_dir.empty()) {
                const std::string stem = config.out_dir + "/" + id.str();
                write_file(stem + ".csv", pooled.to_csv());
                write_file(stem + ".md", pooled.to_markdown(config.class_names));
                if (last_net) save_checkpoint(stem + ".ckpt", *last_net);
            }
            result.reports.emplace(id.str(), std::move(pooled));
        }

    result.learning_curve_csv = curve.str();

    std::ostringstream bars;
    bars << std::setprecision(9);
    bars << "experiment,mean_dice,stddev\n";
    nlohmann::ordered_json summary;
    summary["task"] = std::string(1, config.task_code);
    summary["seeds"] = config.seeds;
    summary["train_sizes"] = config.train_sizes;
    for (const auto& [name, report] : result.reports) {
        double mean = 0, var = 0;
        std::vector<double> dices;
        for (const GridCell& c : result.cells)
            if (c.id.str() == name) dices.push_back(c.test_dice);
        for (double d : dices) mean += d;
        mean /= static_cast<double>(dices.size());
        for (double d : dices) var += (d - mean) * (d - mean);
        var /= static_cast<double>(dices.size());
        bars << name << ',' << mean << ',' << std::sqrt(var) << '\n';

        nlohmann::ordered_json e;
        e["mean_dice"] = mean;
        e["stddev"] = std::sqrt(var);
        e["class_mean"] = report.class_mean;
        summary["experiments"][name] = std::move(e);
    }
    result.bar_chart_csv = bars.str();
    result.summary_json = summary.dump(2) + "\n";

    if (!config.out_dir.empty()) {
        write_file(config.out_dir + "/learning_curve.csv", result.learning_curve_csv);
        write_file(config.out_dir + "/bar_chart.csv", result.bar_chart_csv);
        write_file(config.out_dir + "/summary.json", result.summary_json);
    }
    return result;
}

}  // namespace sseg
