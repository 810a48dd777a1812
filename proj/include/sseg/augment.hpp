#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "sseg/rng.hpp"
#include "sseg/tensor.hpp"

namespace sseg {

// Augmentation policy: 70% of samples get a combination of up to three
// techniques (scaling, rotation, blur, intensity shift, elastic), where
// elastic deformation may only co-occur with blur and/or intensity shift.
// A low-dose noise transform (salt-and-pepper on 20% of the voxels followed
// by Gaussian smoothing) is drawn independently and appended last.
struct AugmentSpec {
    double probability_augmented = 0.70;
    int max_techniques = 3;
    double scale_max = 0.05;          // fraction, symmetric
    double rotation_max_deg = 5.0;    // up to two planes
    double blur_sigma_min = 0.2;      // voxels
    double blur_sigma_max = 1.0;
    double intensity_shift_max = 20;  // HU, symmetric
    int elastic_control_points = 10;  // per axis
    double elastic_max_shift = 5.0;   // voxels
    double noise_probability = 0.2;
    double noise_fraction = 0.2;      // fraction of voxels hit by salt & pepper
    double noise_sigma = 0.9;         // mm (== voxels at 1mm)
};

enum class TechniqueKind { Scale, Rotate, Blur, IntensityShift, Elastic, LowDoseNoise };

bool is_geometric(TechniqueKind k);

struct Technique {
    TechniqueKind kind;
    double scale = 1.0;                                    // Scale
    std::vector<std::pair<int, double>> rotations;         // Rotate: (plane 0=zy,1=zx,2=yx), radians
    double sigma = 0;                                      // Blur
    double shift = 0;                                      // IntensityShift
    std::vector<std::array<float, 3>> elastic_lattice;     // Elastic: control displacements (voxels)
    std::uint64_t noise_seed = 0;                          // LowDoseNoise
};

struct AugmentPlan {
    std::vector<Technique> techniques;  // applied in order; empty = passthrough
};

// All randomness happens here; applying a plan is deterministic.
AugmentPlan draw_plan(const AugmentSpec& spec, Rng& rng);

// Geometric transforms hit intensities (trilinear) and labels (nearest
// neighbor) identically; photometric transforms hit intensities only.
// `labels` covers the centered label_extent^3 window of the intensity patch.
void apply(const AugmentPlan& plan, const AugmentSpec& spec, Tensor& intensity,
           std::vector<std::uint8_t>& labels, std::size_t label_extent);

}  // namespace sseg
