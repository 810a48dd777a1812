#include "sseg/postproc.hpp"

#include <algorithm>
#include <cmath>

#include "sseg/connected.hpp"
#include "sseg/dataset.hpp"

namespace sseg {

namespace {

std::vector<long> tile_positions(std::size_t extent, std::size_t window) {
    std::vector<long> out;
    const long max_origin = extent > window ? static_cast<long>(extent - window) : 0;
    for (long p = 0;; p += static_cast<long>(window)) {
        if (p >= max_origin) {
            out.push_back(max_origin);
            break;
        }
        out.push_back(p);
    }
    return out;
}

}  // namespace

Tiling plan_tiling(const std::array<std::size_t, 3>& extents, const PatchGeometry& geometry) {
    Tiling t;
    t.extents = extents;
    t.output_extent = geometry.output_extent;
    const auto zs = tile_positions(extents[0], t.output_extent);
    const auto ys = tile_positions(extents[1], t.output_extent);
    const auto xs = tile_positions(extents[2], t.output_extent);
    for (long z : zs)
        for (long y : ys)
            for (long x : xs) t.tiles.push_back(Tile{{z, y, x}});
    return t;
}

std::size_t pick_inference_extent(const NetSpec& spec,
                                  const std::array<std::size_t, 3>& extents,
                                  std::size_t cap) {
    const std::size_t longest = std::max({extents[0], extents[1], extents[2]});
    std::size_t best = min_feasible_extent(spec);
    for (;;) {
        const std::size_t next = min_feasible_extent(spec, best + 1);
        if (next > cap) break;
        best = next;
        const auto geom = compute_valid_geometry(spec, best);
        if (geom.output_extent >= longest) break;
    }
    return best;
}

Tensor predict_volume(const Network& net, const Volume& v, std::size_t input_extent) {
    const auto geom = compute_valid_geometry(net.spec(), input_extent);
    const Tiling tiling = plan_tiling(v.extents, geom);
    const std::size_t C = static_cast<std::size_t>(net.spec().out_classes);
    const std::size_t out = geom.output_extent;

    Tensor prob({C, v.extents[0], v.extents[1], v.extents[2]});
    for (const Tile& tile : tiling.tiles) {
        PatchOrigin origin{tile.out_origin};
        const Tensor patch = extract_input_patch(v, origin, input_extent, out);
        const Tensor p = forward(net, patch);
        const std::size_t z1 = std::min(v.extents[0],
                                        static_cast<std::size_t>(tile.out_origin[0]) + out);
        const std::size_t y1 = std::min(v.extents[1],
                                        static_cast<std::size_t>(tile.out_origin[1]) + out);
        const std::size_t x1 = std::min(v.extents[2],
                                        static_cast<std::size_t>(tile.out_origin[2]) + out);
        for (std::size_t c = 0; c < C; ++c)
            for (std::size_t z = tile.out_origin[0]; z < z1; ++z)
                for (std::size_t y = tile.out_origin[1]; y < y1; ++y)
                    for (std::size_t x = tile.out_origin[2]; x < x1; ++x)
                        prob.at(c, z, y, x) = p.at(c, z - tile.out_origin[0],
                                                   y - tile.out_origin[1],
                                                   x - tile.out_origin[2]);
    }
    return prob;
}

std::vector<std::uint8_t> decide_labels(const Tensor& prob) {
    const std::size_t C = prob.extent(0);
    const std::size_t V = prob.numel() / C;
    std::vector<std::uint8_t> labels(V, 0);
    for (std::size_t v = 0; v < V; ++v)
        for (std::size_t c = 1; c < C; ++c)
            if (prob[c * V + v] > 0.5f) {
                labels[v] = static_cast<std::uint8_t>(c);
                break;  // softmax probabilities: at most one channel above 0.5
            }
    return labels;
}

void keep_largest_component(std::vector<std::uint8_t>& labels,
                            const std::array<std::size_t, 3>& extents, int cls) {
    std::vector<int> component_of;
    const auto sizes = label_components(labels, extents, cls, component_of);
    if (sizes.size() < 2) return;
    // ties resolved toward the earlier (smaller seed index) component
    int best = 0;
    for (int c = 1; c < static_cast<int>(sizes.size()); ++c)
        if (sizes[c] > sizes[best]) best = c;
    for (std::size_t v = 0; v < labels.size(); ++v)
        if (component_of[v] != -1 && component_of[v] != best) labels[v] = 0;
}

SparseAnnotation resample_to_original(const SparseAnnotation& a,
                                      const std::array<std::size_t, 3>& orig_extents,
                                      const std::array<double, 3>& orig_spacing) {
    if (orig_extents == a.extents && orig_spacing == a.spacing) return a;
    SparseAnnotation out;
    out.extents = orig_extents;
    out.spacing = orig_spacing;
    out.annotated_classes = a.annotated_classes;
    out.labels.assign(out.voxels(), 0);
    std::array<double, 3> ratio{};
    for (int axis = 0; axis < 3; ++axis) ratio[axis] = orig_spacing[axis] / a.spacing[axis];
    auto src = [&](std::size_t i, int axis) {
        const long s = static_cast<long>(std::floor(static_cast<double>(i) * ratio[axis]));
        return static_cast<std::size_t>(
            std::clamp(s, 0l, static_cast<long>(a.extents[axis]) - 1));
    };
    for (std::size_t z = 0; z < out.extents[0]; ++z)
        for (std::size_t y = 0; y < out.extents[1]; ++y)
            for (std::size_t x = 0; x < out.extents[2]; ++x)
                out.at(z, y, x) = a.at(src(z, 0), src(y, 1), src(x, 2));
    return out;
}

SparseAnnotation segment_volume(const Network& net, const Volume& v,
                                std::size_t input_extent) {
    const Tensor prob = predict_volume(net, v, input_extent);
    SparseAnnotation seg;
    seg.extents = v.extents;
    seg.spacing = v.spacing;
    seg.labels = decide_labels(prob);
    for (int c = 1; c < net.spec().out_classes; ++c) {
        keep_largest_component(seg.labels, seg.extents, c);
        seg.annotated_classes.insert(c);
    }
    return seg;
}

}  // namespace sseg
