#pragma once

#include <array>
#include <cstdint>
#include <set>
#include <vector>

#include "sseg/volume.hpp"

namespace sseg {

// Synthetic desk-scale corpus: a handful of geometric "organs" with distinct
// mean intensities and Gaussian texture, jittered per volume.

struct OrganSpec {
    enum class Shape { Ellipsoid, Box };
    Shape shape = Shape::Ellipsoid;
    std::array<double, 3> center_frac{0.5, 0.5, 0.5};  // fraction of the extents
    std::array<double, 3> radii{10, 10, 10};           // voxels (box: half-widths)
    double intensity = 0;                              // mean HU
};

struct PhantomSpec {
    std::array<std::size_t, 3> extents{72, 72, 72};
    double background_intensity = -120;
    double texture_sigma = 20;
    double position_jitter = 4.0;    // voxels, uniform per axis
    double size_jitter = 0.12;       // fraction, uniform per axis
    double intensity_jitter = 25.0;  // HU, uniform
    int max_retries = 100;
    std::vector<OrganSpec> organs;   // organ i carries class i+1

    // the default 4-foreground-class benchmark phantom
    static PhantomSpec standard(int foreground_classes = 4);
};

struct PhantomVolume {
    Volume volume;
    SparseAnnotation labels;  // full ground truth, all classes annotated
};

// Reproducible volumes with ground truth; intensities inside the CT window.
std::vector<PhantomVolume> generate(const PhantomSpec& spec, std::size_t n,
                                    std::uint64_t seed);

// Drops every class not in `keep`: labels zeroed, annotated_classes reduced.
SparseAnnotation sparsify(const SparseAnnotation& full, const std::set<int>& keep);

// Per-volume annotated-class patterns for sparsifying a training split.
std::vector<std::set<int>> round_robin_pattern(std::size_t n, int classes);
std::vector<std::set<int>> one_or_two_pattern(std::size_t n, int classes, std::uint64_t seed);

}  // namespace sseg
