#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "sseg/class_weights.hpp"
#include "sseg/tensor.hpp"
#include "sseg/volume.hpp"

namespace sseg {

// Inverse-frequency class weights over the annotated foreground voxels of
// the training split, normalized to mean 1. Every class in the dictionary
// must have at least one annotated voxel.
ClassWeights compute_class_weights(const DatasetManifest& manifest);
ClassWeights compute_class_weights(const std::vector<const SparseAnnotation*>& train_annotations,
                                   const std::map<int, std::string>& classes);

// Weights for fully annotated data: label 0 is true background, so it gets an
// inverse-frequency weight like the foreground classes (used by the unmasked
// transfer loss, whose CE term covers background voxels).
ClassWeights compute_dense_class_weights(
    const std::vector<const SparseAnnotation*>& train_annotations,
    const std::map<int, std::string>& classes);

// Origin (z, y, x) of a patch's output window; the input window is the
// output window dilated by the geometry margin, clamp-padded at borders.
struct PatchOrigin {
    std::array<long, 3> out_origin{};
};

// Candidate output windows on a stride grid (stride in voxels == mm at 1mm
// isotropic spacing), clamped inside the volume, final position included so
// the union covers every voxel when stride <= output_extent. A window is
// kept iff it contains at least one annotated voxel.
std::vector<PatchOrigin> positive_patch_origins(const SparseAnnotation& annotation,
                                                std::size_t output_extent, std::size_t stride);

// Intensity patch [1, E, E, E] around the output window; voxels outside the
// volume are clamp-to-edge.
Tensor extract_input_patch(const Volume& v, const PatchOrigin& origin,
                           std::size_t input_extent, std::size_t output_extent);

// Label patch covering the output window only (z-major, output_extent^3).
std::vector<std::uint8_t> extract_label_patch(const SparseAnnotation& a,
                                              const PatchOrigin& origin,
                                              std::size_t output_extent);

}  // namespace sseg
