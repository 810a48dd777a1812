#include "sseg/metrics.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "sseg/errors.hpp"

namespace sseg {

double hard_dice(const std::vector<std::uint8_t>& pred, const std::vector<std::uint8_t>& ref,
                 int cls) {
    if (pred.size() != ref.size())
        throw ConfigError("hard_dice: grid size mismatch (" + std::to_string(pred.size()) +
                          " vs " + std::to_string(ref.size()) + ")");
    std::size_t p = 0, r = 0, both = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const bool in_p = pred[i] == cls, in_r = ref[i] == cls;
        p += in_p;
        r += in_r;
        both += in_p && in_r;
    }
    if (p == 0 && r == 0) return 1.0;
    if (p == 0 || r == 0) return 0.0;
    return 2.0 * static_cast<double>(both) / static_cast<double>(p + r);
}

double VolumeDice::mean() const {
    if (per_class.empty()) return 0.0;
    double sum = 0;
    for (const auto& [_, d] : per_class) sum += d;
    return sum / static_cast<double>(per_class.size());
}

void DiceReport::finalize() {
    class_mean.clear();
    class_stddev.clear();
    std::map<int, std::vector<double>> per_class;
    double volume_mean_sum = 0;
    std::size_t scored_volumes = 0;
    for (const VolumeDice& v : volumes) {
        if (v.per_class.empty()) continue;
        ++scored_volumes;
        volume_mean_sum += v.mean();
        for (const auto& [cls, d] : v.per_class) per_class[cls].push_back(d);
    }
    for (const auto& [cls, values] : per_class) {
        double mean = 0;
        for (double d : values) mean += d;
        mean /= static_cast<double>(values.size());
        double var = 0;
        for (double d : values) var += (d - mean) * (d - mean);
        var /= static_cast<double>(values.size());
        class_mean[cls] = mean;
        class_stddev[cls] = std::sqrt(var);
    }
    grand_mean = scored_volumes ? volume_mean_sum / static_cast<double>(scored_volumes) : 0.0;
}

std::string DiceReport::to_markdown(const std::map<int, std::string>& classes) const {
    std::ostringstream os;
    os << std::fixed << std::setprecision(3);
    os << "| class | mean ± σ |\n|---|---|\n";
    for (const auto& [cls, mean] : class_mean) {
        const auto it = classes.find(cls);
        os << "| " << (it != classes.end() ? it->second : std::to_string(cls)) << " | " << mean
           << " ± " << class_stddev.at(cls) << " |\n";
    }
    os << "| all | " << grand_mean << " |\n";
    return os.str();
}

std::string DiceReport::to_csv() const {
    std::ostringstream os;
    os << std::setprecision(9);
    os << "experiment,volume,class,dice\n";
    for (const VolumeDice& v : volumes)
        for (const auto& [cls, d] : v.per_class)
            os << experiment << ',' << v.volume << ',' << cls << ',' << d << '\n';
    return os.str();
}

DiceReport score_predictions(const std::vector<std::string>& names,
                             const std::vector<const SparseAnnotation*>& predictions,
                             const std::vector<const SparseAnnotation*>& references) {
    if (predictions.size() != references.size() || names.size() != predictions.size())
        throw ConfigError("score_predictions: input list sizes differ");
    DiceReport report;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        VolumeDice row;
        row.volume = names[i];
        // structures without annotations are ignored
        for (int cls : references[i]->annotated_classes)
            row.per_class[cls] =
                hard_dice(predictions[i]->labels, references[i]->labels, cls);
        report.volumes.push_back(std::move(row));
    }
    report.finalize();
    return report;
}

}  // namespace sseg
