#include "sseg/harmonize.hpp"

#include <algorithm>
#include <cstddef>

#include "sseg/connected.hpp"

namespace sseg {

namespace {

void apply_merge(SparseAnnotation& a, int src, int dst) {
    for (auto& l : a.labels)
        if (l == src) l = static_cast<std::uint8_t>(dst);
    a.annotated_classes.erase(src);
    a.annotated_classes.insert(dst);
}

void apply_collapse(SparseAnnotation& a, const std::vector<int>& srcs, int dst) {
    for (auto& l : a.labels)
        if (std::find(srcs.begin(), srcs.end(), static_cast<int>(l)) != srcs.end())
            l = static_cast<std::uint8_t>(dst);
    for (int s : srcs) a.annotated_classes.erase(s);
    a.annotated_classes.insert(dst);
}

void apply_split(SparseAnnotation& a, const RemapRule& rule, bool larger_x_is_left,
                 std::vector<std::string>* warnings) {
    const int src = rule.src.at(0);
    std::vector<int> component_of;
    const auto sizes = label_components(a.labels, a.extents, src, component_of);
    if (sizes.empty())
        throw DataError("split_laterality: class " + std::to_string(src) +
                        " has no voxels to split");

    std::size_t total = 0;
    for (std::size_t s : sizes) total += s;
    std::size_t significant = 0;
    for (std::size_t s : sizes)
        if (s * 100 >= total) ++significant;  // >= 1% of the class volume
    if (significant != 2 && warnings)
        warnings->push_back("split_laterality: class " + std::to_string(src) + " has " +
                            std::to_string(significant) +
                            " significant components (expected 2); assigning by centroid side");

    // per-component x centroid
    std::vector<double> cx(sizes.size(), 0);
    const std::size_t X = a.extents[2];
    for (std::size_t v = 0; v < a.voxels(); ++v)
        if (component_of[v] != -1) cx[component_of[v]] += static_cast<double>(v % X);
    for (std::size_t c = 0; c < sizes.size(); ++c) cx[c] /= static_cast<double>(sizes[c]);

    const double midline = static_cast<double>(X - 1) / 2.0;
    for (std::size_t v = 0; v < a.voxels(); ++v) {
        if (component_of[v] == -1) continue;
        const bool larger_x = cx[component_of[v]] > midline;
        const bool is_left = larger_x == larger_x_is_left;
        a.labels[v] = static_cast<std::uint8_t>(is_left ? rule.left_id : rule.right_id);
    }
    a.annotated_classes.erase(src);
    a.annotated_classes.insert(rule.left_id);
    a.annotated_classes.insert(rule.right_id);
}

}  // namespace

SparseAnnotation harmonize(const SparseAnnotation& a, const LabelRemap& remap,
                           std::vector<std::string>* warnings) {
    SparseAnnotation out = a;
    for (const auto& rule : remap.rules) {
        switch (rule.kind) {
            case RemapRule::Kind::Merge:
                apply_merge(out, rule.src.at(0), rule.dst);
                break;
            case RemapRule::Kind::Collapse:
                apply_collapse(out, rule.src, rule.dst);
                break;
            case RemapRule::Kind::SplitLaterality:
                apply_split(out, rule, remap.larger_x_is_left, warnings);
                break;
        }
    }
    out.validate();
    return out;
}

}  // namespace sseg
