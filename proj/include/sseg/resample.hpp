#pragma once

#include <array>

#include "sseg/volume.hpp"

namespace sseg {

// Tricubic (Catmull-Rom) resampling to the target spacing; clamp-to-edge at
// the borders, output extents = ceil(extent * spacing / target).
Volume resample_volume(const Volume& v, std::array<double, 3> target_spacing);

// Nearest-neighbor resampling for label grids; annotated classes carry over.
SparseAnnotation resample_labels(const SparseAnnotation& a,
                                 std::array<double, 3> target_spacing);

// CT: clip intensities to [-500, 400] HU.
Volume normalize_ct(Volume v);

// MR: clip to the per-volume 5%/95% percentiles and map that interval
// affinely onto [-500, 400].
Volume normalize_mr(Volume v);

// linear-interpolated percentile (p in [0,1]) over all voxels
double percentile(const std::vector<float>& values, double p);

}  // namespace sseg
