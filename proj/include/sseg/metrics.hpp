#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sseg/volume.hpp"

namespace sseg {

// Hard Dice 2|P∩R| / (|P|+|R|) for one class; 1.0 when both masks are empty,
// 0.0 when exactly one is.
double hard_dice(const std::vector<std::uint8_t>& pred, const std::vector<std::uint8_t>& ref,
                 int cls);

struct VolumeDice {
    std::string volume;
    std::map<int, double> per_class;  // only the classes scored for this volume
    double mean() const;
};

struct DiceReport {
    std::string experiment;
    std::vector<VolumeDice> volumes;
    std::map<int, double> class_mean;    // over the volumes scoring the class
    std::map<int, double> class_stddev;  // population standard deviation
    double grand_mean = 0;               // mean of per-volume class means

    void finalize();
    std::string to_markdown(const std::map<int, std::string>& classes) const;
    std::string to_csv() const;
};

// Scores predicted label grids against references over each volume's
// annotated classes only.
DiceReport score_predictions(const std::vector<std::string>& names,
                             const std::vector<const SparseAnnotation*>& predictions,
                             const std::vector<const SparseAnnotation*>& references);

}  // namespace sseg
