#include "sseg/dataset.hpp"

#include <algorithm>

namespace sseg {

ClassWeights compute_class_weights(
    const std::vector<const SparseAnnotation*>& train_annotations,
    const std::map<int, std::string>& classes) {
    if (train_annotations.empty()) throw DataError("training split is empty");
    std::map<int, std::uint64_t> counts;
    for (const auto& [id, _] : classes) counts[id] = 0;
    for (const auto* a : train_annotations)
        for (std::uint8_t l : a->labels)
            if (l != 0) ++counts[static_cast<int>(l)];
    for (const auto& [id, n] : counts)
        if (n == 0)
            throw DataError("class " + std::to_string(id) + " (" + classes.at(id) +
                            ") has zero annotated voxels in the training split");
    return ClassWeights::from_counts(counts);
}

ClassWeights compute_dense_class_weights(
    const std::vector<const SparseAnnotation*>& train_annotations,
    const std::map<int, std::string>& classes) {
    if (train_annotations.empty()) throw DataError("training split is empty");
    std::map<int, std::uint64_t> counts;
    counts[0] = 0;
    for (const auto& [id, _] : classes) counts[id] = 0;
    for (const auto* a : train_annotations)
        for (std::uint8_t l : a->labels) ++counts[static_cast<int>(l)];
    for (const auto& [id, n] : counts)
        if (n == 0)
            throw DataError("class " + std::to_string(id) +
                            (id ? " (" + classes.at(id) + ")" : " (background)") +
                            " has zero voxels in the training split");
    return ClassWeights::from_counts(counts);
}

ClassWeights compute_class_weights(const DatasetManifest& manifest) {
    std::vector<SparseAnnotation> loaded;
    for (const auto* e : manifest.split_entries(Split::Train))
        loaded.push_back(load_labels(manifest.resolve(e->labels)));
    std::vector<const SparseAnnotation*> ptrs;
    for (const auto& a : loaded) ptrs.push_back(&a);
    return compute_class_weights(ptrs, manifest.classes);
}

namespace {

std::vector<long> grid_positions(std::size_t extent, std::size_t window, std::size_t stride) {
    const long max_origin =
        extent > window ? static_cast<long>(extent - window) : 0;
    // a stride of the whole volume (or more) means one centered window
    if (stride >= extent) return {max_origin / 2};
    std::vector<long> positions;
    for (long p = 0; p < max_origin; p += static_cast<long>(stride)) positions.push_back(p);
    positions.push_back(max_origin);
    return positions;
}

}  // namespace

std::vector<PatchOrigin> positive_patch_origins(const SparseAnnotation& annotation,
                                                std::size_t output_extent, std::size_t stride) {
    if (stride == 0) throw ConfigError("patch stride must be positive");
    const auto zs = grid_positions(annotation.extents[0], output_extent, stride);
    const auto ys = grid_positions(annotation.extents[1], output_extent, stride);
    const auto xs = grid_positions(annotation.extents[2], output_extent, stride);

    std::vector<PatchOrigin> out;
    for (long z : zs)
        for (long y : ys)
            for (long x : xs) {
                bool positive = false;
                const std::size_t z1 =
                    std::min(annotation.extents[0], static_cast<std::size_t>(z) + output_extent);
                const std::size_t y1 =
                    std::min(annotation.extents[1], static_cast<std::size_t>(y) + output_extent);
                const std::size_t x1 =
                    std::min(annotation.extents[2], static_cast<std::size_t>(x) + output_extent);
                for (std::size_t zz = z; zz < z1 && !positive; ++zz)
                    for (std::size_t yy = y; yy < y1 && !positive; ++yy)
                        for (std::size_t xx = x; xx < x1; ++xx)
                            if (annotation.at(zz, yy, xx) != 0) {
                                positive = true;
                                break;
                            }
                if (positive) out.push_back(PatchOrigin{{z, y, x}});
            }
    return out;
}

Tensor extract_input_patch(const Volume& v, const PatchOrigin& origin,
                           std::size_t input_extent, std::size_t output_extent) {
    if (input_extent < output_extent || (input_extent - output_extent) % 2 != 0)
        throw GeometryError("input/output patch extents are inconsistent");
    const long margin = static_cast<long>((input_extent - output_extent) / 2);
    Tensor patch({1, input_extent, input_extent, input_extent});
    auto clamp = [](long i, std::size_t extent) {
        return static_cast<std::size_t>(
            std::clamp(i, 0l, static_cast<long>(extent) - 1));
    };
    for (std::size_t z = 0; z < input_extent; ++z) {
        const std::size_t sz = clamp(origin.out_origin[0] - margin + static_cast<long>(z),
                                     v.extents[0]);
        for (std::size_t y = 0; y < input_extent; ++y) {
            const std::size_t sy = clamp(origin.out_origin[1] - margin + static_cast<long>(y),
                                         v.extents[1]);
            for (std::size_t x = 0; x < input_extent; ++x) {
                const std::size_t sx = clamp(
                    origin.out_origin[2] - margin + static_cast<long>(x), v.extents[2]);
                patch.at(0, z, y, x) = v.at(sz, sy, sx);
            }
        }
    }
    return patch;
}

std::vector<std::uint8_t> extract_label_patch(const SparseAnnotation& a,
                                              const PatchOrigin& origin,
                                              std::size_t output_extent) {
    std::vector<std::uint8_t> out(output_extent * output_extent * output_extent, 0);
    for (std::size_t z = 0; z < output_extent; ++z) {
        const std::size_t sz = static_cast<std::size_t>(origin.out_origin[0]) + z;
        if (sz >= a.extents[0]) continue;
        for (std::size_t y = 0; y < output_extent; ++y) {
            const std::size_t sy = static_cast<std::size_t>(origin.out_origin[1]) + y;
            if (sy >= a.extents[1]) continue;
            for (std::size_t x = 0; x < output_extent; ++x) {
                const std::size_t sx = static_cast<std::size_t>(origin.out_origin[2]) + x;
                if (sx >= a.extents[2]) continue;
                out[(z * output_extent + y) * output_extent + x] = a.at(sz, sy, sx);
            }
        }
    }
    return out;
}

}  // namespace sseg
