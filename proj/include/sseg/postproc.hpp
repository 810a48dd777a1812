#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "sseg/tensor.hpp"
#include "sseg/unet.hpp"
#include "sseg/volume.hpp"

namespace sseg {

// Full-volume inference: non-overlapping output windows stitched over the
// volume, thresholding, largest-component filtering, and back-resampling.

struct Tile {
    std::array<long, 3> out_origin{};  // output window origin, clamped in-volume
};

struct Tiling {
    std::array<std::size_t, 3> extents{};
    std::size_t output_extent = 0;
    std::vector<Tile> tiles;  // applied in index order; later tiles win on borders
};

Tiling plan_tiling(const std::array<std::size_t, 3>& extents, const PatchGeometry& geometry);

// Largest feasible input extent whose output covers the volume in few tiles,
// capped to keep per-patch memory bounded.
std::size_t pick_inference_extent(const NetSpec& spec,
                                  const std::array<std::size_t, 3>& extents,
                                  std::size_t cap = 120);

// Stitched softmax probabilities [C, Z, Y, X] at the volume's grid.
Tensor predict_volume(const Network& net, const Volume& v, std::size_t input_extent);

// Foreground class with probability > 0.5 if one exists, else background.
std::vector<std::uint8_t> decide_labels(const Tensor& prob);

// Keeps only the largest 6-connected component of `cls` (ties: smallest seed
// scan index); all other components become background.
void keep_largest_component(std::vector<std::uint8_t>& labels,
                            const std::array<std::size_t, 3>& extents, int cls);

// Nearest-neighbor back-resampling onto the original grid.
SparseAnnotation resample_to_original(const SparseAnnotation& a,
                                      const std::array<std::size_t, 3>& orig_extents,
                                      const std::array<double, 3>& orig_spacing);

// Convenience: predict, threshold, and filter every foreground class.
SparseAnnotation segment_volume(const Network& net, const Volume& v,
                                std::size_t input_extent);

}  // namespace sseg
