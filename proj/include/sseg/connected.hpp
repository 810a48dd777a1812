#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace sseg {

// 6-connected component labeling of the voxels equal to `cls`.
// component_of gets the component index per voxel (-1 elsewhere); the return
// value holds component sizes, indexed by discovery order (scan order of the
// component seed, so ties can be broken by smallest seed index).
std::vector<std::size_t> label_components(const std::vector<std::uint8_t>& labels,
                                          const std::array<std::size_t, 3>& extents, int cls,
                                          std::vector<int>& component_of);

}  // namespace sseg
