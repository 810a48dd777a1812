#pragma once

#include <cmath>
#include <map>
#include <string>

#include "sseg/errors.hpp"

namespace sseg {

// Per-class weights for the cross-entropy term: inverse voxel frequency over
// the annotated foreground of the training split, normalized to mean 1.
struct ClassWeights {
    std::map<int, double> omega;

    double at(int cls) const {
        auto it = omega.find(cls);
        return it == omega.end() ? 1.0 : it->second;
    }

    static ClassWeights from_counts(const std::map<int, std::uint64_t>& voxel_counts) {
        ClassWeights w;
        std::uint64_t total = 0;
        for (const auto& [cls, n] : voxel_counts) {
            if (n == 0)
                throw DataError("class " + std::to_string(cls) +
                                " has zero annotated voxels in the training split");
            total += n;
        }
        if (voxel_counts.empty()) throw DataError("no annotated classes in the training split");
        double inv_sum = 0;
        for (const auto& [cls, n] : voxel_counts) {
            const double f = static_cast<double>(n) / static_cast<double>(total);
            w.omega[cls] = 1.0 / f;
            inv_sum += 1.0 / f;
        }
        const double mean = inv_sum / static_cast<double>(voxel_counts.size());
        for (auto& [cls, v] : w.omega) v /= mean;
        return w;
    }
};

}  // namespace sseg
