#pragma once

#include <vector>

#include "sseg/volume.hpp"

namespace sseg {

// Label remapping that reconciles differing annotation protocols: merging a
// tumor label into its organ, collapsing a label family into one class, and
// splitting a single label into left/right by component centroid.
struct RemapRule {
    enum class Kind { Merge, SplitLaterality, Collapse };
    Kind kind = Kind::Merge;
    std::vector<int> src;  // Merge/SplitLaterality use src[0]; Collapse uses all
    int dst = 0;           // Merge/Collapse target
    int left_id = 0;       // SplitLaterality targets
    int right_id = 0;
};

struct LabelRemap {
    std::vector<RemapRule> rules;  // applied in order
    // larger x centroid = anatomical left (patient supine convention)
    bool larger_x_is_left = true;
};

// Applies the rules in order; annotated_classes is updated consistently.
// Non-fatal irregularities (e.g. a laterality split that does not find
// exactly two significant components) are reported through `warnings`.
SparseAnnotation harmonize(const SparseAnnotation& a, const LabelRemap& remap,
                           std::vector<std::string>* warnings = nullptr);

}  // namespace sseg
