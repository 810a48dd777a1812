#include "sseg/resample.hpp"

#include <algorithm>
#include <cmath>

namespace sseg {

namespace {

constexpr double kClipLo = -500.0;
constexpr double kClipHi = 400.0;

std::array<std::size_t, 3> target_extents(const std::array<std::size_t, 3>& extents,
                                          const std::array<double, 3>& spacing,
                                          const std::array<double, 3>& target) {
    std::array<std::size_t, 3> out{};
    for (int a = 0; a < 3; ++a) {
        if (target[a] <= 0) throw DataError("target spacing must be positive");
        out[a] = static_cast<std::size_t>(
            std::ceil(static_cast<double>(extents[a]) * spacing[a] / target[a]));
        if (out[a] == 0) throw DataError("degenerate extent after resampling");
    }
    return out;
}

// Catmull-Rom weights for the four taps around a fractional position t in [0,1).
void catmull_rom(double t, double w[4]) {
    const double t2 = t * t, t3 = t2 * t;
    w[0] = 0.5 * (-t3 + 2 * t2 - t);
    w[1] = 0.5 * (3 * t3 - 5 * t2 + 2);
    w[2] = 0.5 * (-3 * t3 + 4 * t2 + t);
    w[3] = 0.5 * (t3 - t2);
}

std::size_t clamp_index(long i, std::size_t extent) {
    if (i < 0) return 0;
    if (i >= static_cast<long>(extent)) return extent - 1;
    return static_cast<std::size_t>(i);
}

}  // namespace

Volume resample_volume(const Volume& v, std::array<double, 3> target_spacing) {
    const auto out_ext = target_extents(v.extents, v.spacing, target_spacing);
    if (out_ext == v.extents && target_spacing == v.spacing) return v;

    Volume out = Volume::make(out_ext, target_spacing, v.modality);
    std::array<double, 3> ratio{};
    for (int a = 0; a < 3; ++a) ratio[a] = target_spacing[a] / v.spacing[a];

    for (std::size_t z = 0; z < out_ext[0]; ++z) {
        const double sz = static_cast<double>(z) * ratio[0];
        const long iz = static_cast<long>(std::floor(sz));
        double wz[4];
        catmull_rom(sz - static_cast<double>(iz), wz);
        for (std::size_t y = 0; y < out_ext[1]; ++y) {
            const double sy = static_cast<double>(y) * ratio[1];
            const long iy = static_cast<long>(std::floor(sy));
            double wy[4];
            catmull_rom(sy - static_cast<double>(iy), wy);
            for (std::size_t x = 0; x < out_ext[2]; ++x) {
                const double sx = static_cast<double>(x) * ratio[2];
                const long ix = static_cast<long>(std::floor(sx));
                double wx[4];
                catmull_rom(sx - static_cast<double>(ix), wx);
                double acc = 0;
                for (int a = 0; a < 4; ++a) {
                    const std::size_t zz = clamp_index(iz + a - 1, v.extents[0]);
                    for (int b = 0; b < 4; ++b) {
                        const std::size_t yy = clamp_index(iy + b - 1, v.extents[1]);
                        double row = 0;
                        for (int c = 0; c < 4; ++c)
                            row += wx[c] * v.at(zz, yy, clamp_index(ix + c - 1, v.extents[2]));
                        acc += wz[a] * wy[b] * row;
                    }
                }
                out.at(z, y, x) = static_cast<float>(acc);
            }
        }
    }
    return out;
}

SparseAnnotation resample_labels(const SparseAnnotation& a,
                                 std::array<double, 3> target_spacing) {
    const auto out_ext = target_extents(a.extents, a.spacing, target_spacing);
    if (out_ext == a.extents && target_spacing == a.spacing) return a;

    SparseAnnotation out;
    out.extents = out_ext;
    out.spacing = target_spacing;
    out.annotated_classes = a.annotated_classes;
    out.labels.assign(out.voxels(), 0);
    std::array<double, 3> ratio{};
    for (int axis = 0; axis < 3; ++axis) ratio[axis] = target_spacing[axis] / a.spacing[axis];

    for (std::size_t z = 0; z < out_ext[0]; ++z) {
        const std::size_t sz =
            clamp_index(static_cast<long>(std::floor(static_cast<double>(z) * ratio[0])),
                        a.extents[0]);
        for (std::size_t y = 0; y < out_ext[1]; ++y) {
            const std::size_t sy =
                clamp_index(static_cast<long>(std::floor(static_cast<double>(y) * ratio[1])),
                            a.extents[1]);
            for (std::size_t x = 0; x < out_ext[2]; ++x) {
                const std::size_t sx = clamp_index(
                    static_cast<long>(std::floor(static_cast<double>(x) * ratio[2])),
                    a.extents[2]);
                out.at(z, y, x) = a.at(sz, sy, sx);
            }
        }
    }
    return out;
}

Volume normalize_ct(Volume v) {
    if (v.modality != Modality::CT)
        throw ConfigError("normalize_ct: volume modality is not CT");
    for (float& x : v.data)
        x = std::clamp(x, static_cast<float>(kClipLo), static_cast<float>(kClipHi));
    return v;
}

double percentile(const std::vector<float>& values, double p) {
    if (values.empty()) throw DataError("percentile of empty volume");
    std::vector<float> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return (1.0 - frac) * sorted[lo] + frac * sorted[hi];
}

Volume normalize_mr(Volume v) {
    if (v.modality != Modality::MR)
        throw ConfigError("normalize_mr: volume modality is not MR");
    const double p5 = percentile(v.data, 0.05);
    const double p95 = percentile(v.data, 0.95);
    if (p5 == p95) throw DataError("normalize_mr: degenerate intensity range (p5 == p95)");
    const double scale = (kClipHi - kClipLo) / (p95 - p5);
    for (float& x : v.data) {
        const double clipped = std::clamp(static_cast<double>(x), p5, p95);
        x = static_cast<float>(kClipLo + (clipped - p5) * scale);
    }
    return v;
}

}  // namespace sseg
