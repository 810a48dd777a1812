#include "sseg/augment.hpp"

#include <algorithm>
#include <cmath>

#include "sseg/errors.hpp"

namespace sseg {

bool is_geometric(TechniqueKind k) {
    return k == TechniqueKind::Scale || k == TechniqueKind::Rotate ||
           k == TechniqueKind::Elastic;
}

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr float kPepper = -500.0f;
constexpr float kSalt = 400.0f;

Technique draw_technique(TechniqueKind kind, const AugmentSpec& spec, Rng& rng) {
    Technique t;
    t.kind = kind;
    switch (kind) {
        case TechniqueKind::Scale:
            t.scale = 1.0 + rng.uniform(-spec.scale_max, spec.scale_max);
            break;
        case TechniqueKind::Rotate: {
            // 1 or 2 distinct planes with equal probability
            const int n_planes = 1 + static_cast<int>(rng.below(2));
            std::vector<int> planes = {0, 1, 2};
            rng.shuffle(planes);
            const double max_rad = spec.rotation_max_deg * kPi / 180.0;
            for (int i = 0; i < n_planes; ++i)
                t.rotations.emplace_back(planes[i], rng.uniform(-max_rad, max_rad));
            break;
        }
        case TechniqueKind::Blur:
            t.sigma = rng.uniform(spec.blur_sigma_min, spec.blur_sigma_max);
            break;
        case TechniqueKind::IntensityShift:
            t.shift = rng.uniform(-spec.intensity_shift_max, spec.intensity_shift_max);
            break;
        case TechniqueKind::Elastic: {
            const int n = spec.elastic_control_points;
            t.elastic_lattice.resize(static_cast<std::size_t>(n) * n * n);
            for (auto& d : t.elastic_lattice)
                for (int a = 0; a < 3; ++a)
                    d[a] = static_cast<float>(
                        rng.uniform(-spec.elastic_max_shift, spec.elastic_max_shift));
            break;
        }
        case TechniqueKind::LowDoseNoise:
            t.noise_seed = rng.next_u64();
            break;
    }
    return t;
}

}  // namespace

AugmentPlan draw_plan(const AugmentSpec& spec, Rng& rng) {
    AugmentPlan plan;
    if (rng.uniform() < spec.probability_augmented) {
        const TechniqueKind pool[5] = {TechniqueKind::Scale, TechniqueKind::Rotate,
                                       TechniqueKind::Blur, TechniqueKind::IntensityShift,
                                       TechniqueKind::Elastic};
        const int k = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.max_techniques)));
        std::vector<TechniqueKind> chosen;
        for (;;) {
            chosen.clear();
            std::vector<int> order = {0, 1, 2, 3, 4};
            rng.shuffle(order);
            for (int i = 0; i < k; ++i) chosen.push_back(pool[order[i]]);
            // elastic deformation combines only with blur and/or intensity shift
            const bool has_elastic =
                std::find(chosen.begin(), chosen.end(), TechniqueKind::Elastic) != chosen.end();
            const bool has_other_geometric =
                std::find(chosen.begin(), chosen.end(), TechniqueKind::Scale) != chosen.end() ||
                std::find(chosen.begin(), chosen.end(), TechniqueKind::Rotate) != chosen.end();
            if (!(has_elastic && has_other_geometric)) break;
        }
        // photometric after geometric, draw order otherwise preserved
        std::stable_partition(chosen.begin(), chosen.end(),
                              [](TechniqueKind t) { return is_geometric(t); });
        for (TechniqueKind kind : chosen)
            plan.techniques.push_back(draw_technique(kind, spec, rng));
    }
    if (rng.uniform() < spec.noise_probability)
        plan.techniques.push_back(draw_technique(TechniqueKind::LowDoseNoise, spec, rng));
    return plan;
}

namespace {

float sample_trilinear(const Tensor& img, double z, double y, double x) {
    const std::size_t Z = img.extent(1), Y = img.extent(2), X = img.extent(3);
    auto clampi = [](long i, std::size_t extent) {
        return static_cast<std::size_t>(std::clamp(i, 0l, static_cast<long>(extent) - 1));
    };
    const long z0 = static_cast<long>(std::floor(z)), y0 = static_cast<long>(std::floor(y)),
               x0 = static_cast<long>(std::floor(x));
    const double fz = z - static_cast<double>(z0), fy = y - static_cast<double>(y0),
                 fx = x - static_cast<double>(x0);
    double acc = 0;
    for (int dz = 0; dz < 2; ++dz)
        for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx) {
                const double w = (dz ? fz : 1 - fz) * (dy ? fy : 1 - fy) * (dx ? fx : 1 - fx);
                acc += w * img.at(0, clampi(z0 + dz, Z), clampi(y0 + dy, Y),
                                  clampi(x0 + dx, X));
            }
    return static_cast<float>(acc);
}

std::uint8_t sample_nearest(const std::vector<std::uint8_t>& labels, std::size_t extent,
                            double z, double y, double x) {
    auto clampi = [extent](double v) {
        const long i = static_cast<long>(std::lround(v));
        return static_cast<std::size_t>(std::clamp(i, 0l, static_cast<long>(extent) - 1));
    };
    return labels[(clampi(z) * extent + clampi(y)) * extent + clampi(x)];
}

// Maps an output coordinate (input-patch frame) to its source coordinate.
struct GeometricMap {
    const Technique& t;
    double center;         // input patch center
    std::size_t input_extent;

    std::array<double, 3> operator()(double z, double y, double x) const {
        switch (t.kind) {
            case TechniqueKind::Scale: {
                const double inv = 1.0 / t.scale;
                return {center + (z - center) * inv, center + (y - center) * inv,
                        center + (x - center) * inv};
            }
            case TechniqueKind::Rotate: {
                double c[3] = {z - center, y - center, x - center};
                // inverse rotation: apply negated angles in reverse order
                for (auto it = t.rotations.rbegin(); it != t.rotations.rend(); ++it) {
                    const auto [plane, angle] = *it;
                    const int a = plane == 2 ? 1 : 0;   // first axis of the plane
                    const int b = plane == 0 ? 1 : 2;   // second axis
                    const double ca = std::cos(-angle), sa = std::sin(-angle);
                    const double pa = ca * c[a] - sa * c[b];
                    const double pb = sa * c[a] + ca * c[b];
                    c[a] = pa;
                    c[b] = pb;
                }
                return {c[0] + center, c[1] + center, c[2] + center};
            }
            case TechniqueKind::Elastic: {
                const int n = static_cast<int>(std::round(
                    std::cbrt(static_cast<double>(t.elastic_lattice.size()))));
                // trilinear interpolation over the control lattice spanning the patch
                const double pitch = static_cast<double>(input_extent - 1) /
                                     static_cast<double>(n - 1);
                auto disp = [&](int axis) {
                    const double gz = z / pitch, gy = y / pitch, gx = x / pitch;
                    auto clampi = [n](long i) {
                        return static_cast<std::size_t>(
                            std::clamp(i, 0l, static_cast<long>(n) - 1));
                    };
                    const long z0 = static_cast<long>(std::floor(gz)),
                               y0 = static_cast<long>(std::floor(gy)),
                               x0 = static_cast<long>(std::floor(gx));
                    const double fz = gz - static_cast<double>(z0),
                                 fy = gy - static_cast<double>(y0),
                                 fx = gx - static_cast<double>(x0);
                    double acc = 0;
                    for (int dz = 0; dz < 2; ++dz)
                        for (int dy = 0; dy < 2; ++dy)
                            for (int dx = 0; dx < 2; ++dx) {
                                const double w = (dz ? fz : 1 - fz) * (dy ? fy : 1 - fy) *
                                                 (dx ? fx : 1 - fx);
                                const std::size_t idx =
                                    (clampi(z0 + dz) * n + clampi(y0 + dy)) * n +
                                    clampi(x0 + dx);
                                acc += w * t.elastic_lattice[idx][axis];
                            }
                    return acc;
                };
                return {z + disp(0), y + disp(1), x + disp(2)};
            }
            default:
                return {z, y, x};
        }
    }
};

void apply_geometric(const Technique& t, Tensor& intensity,
                     std::vector<std::uint8_t>& labels, std::size_t label_extent) {
    const std::size_t E = intensity.extent(1);
    const double center = static_cast<double>(E - 1) / 2.0;
    const double margin = static_cast<double>(E - label_extent) / 2.0;
    const GeometricMap map{t, center, E};

    Tensor new_intensity(intensity.shape());
    for (std::size_t z = 0; z < E; ++z)
        for (std::size_t y = 0; y < E; ++y)
            for (std::size_t x = 0; x < E; ++x) {
                const auto s = map(static_cast<double>(z), static_cast<double>(y),
                                   static_cast<double>(x));
                new_intensity.at(0, z, y, x) = sample_trilinear(intensity, s[0], s[1], s[2]);
            }

    std::vector<std::uint8_t> new_labels(labels.size());
    for (std::size_t z = 0; z < label_extent; ++z)
        for (std::size_t y = 0; y < label_extent; ++y)
            for (std::size_t x = 0; x < label_extent; ++x) {
                // label coordinates live in the input-patch frame
                const auto s = map(static_cast<double>(z) + margin,
                                   static_cast<double>(y) + margin,
                                   static_cast<double>(x) + margin);
                new_labels[(z * label_extent + y) * label_extent + x] = sample_nearest(
                    labels, label_extent, s[0] - margin, s[1] - margin, s[2] - margin);
            }
    intensity = std::move(new_intensity);
    labels = std::move(new_labels);
}

void gaussian_blur(Tensor& img, double sigma) {
    const std::size_t E[3] = {img.extent(1), img.extent(2), img.extent(3)};
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[i + radius] = std::exp(-0.5 * (i / sigma) * (i / sigma));
        sum += kernel[i + radius];
    }
    for (double& k : kernel) k /= sum;

    Tensor tmp(img.shape());
    for (int axis = 0; axis < 3; ++axis) {
        const Tensor& src = img;
        for (std::size_t z = 0; z < E[0]; ++z)
            for (std::size_t y = 0; y < E[1]; ++y)
                for (std::size_t x = 0; x < E[2]; ++x) {
                    long idx[3] = {static_cast<long>(z), static_cast<long>(y),
                                   static_cast<long>(x)};
                    double acc = 0;
                    for (int i = -radius; i <= radius; ++i) {
                        long probe[3] = {idx[0], idx[1], idx[2]};
                        probe[axis] = std::clamp(idx[axis] + i, 0l,
                                                 static_cast<long>(E[axis]) - 1);
                        acc += kernel[i + radius] *
                               src.at(0, static_cast<std::size_t>(probe[0]),
                                      static_cast<std::size_t>(probe[1]),
                                      static_cast<std::size_t>(probe[2]));
                    }
                    tmp.at(0, z, y, x) = static_cast<float>(acc);
                }
        std::swap(img, tmp);
    }
}

void apply_low_dose_noise(const Technique& t, const AugmentSpec& spec, Tensor& img) {
    Rng rng(t.noise_seed);
    for (std::size_t i = 0; i < img.numel(); ++i)
        if (rng.uniform() < spec.noise_fraction)
            img[i] = rng.uniform() < 0.5 ? kPepper : kSalt;
    gaussian_blur(img, spec.noise_sigma);
}

}  // namespace

void apply(const AugmentPlan& plan, const AugmentSpec& spec, Tensor& intensity,
           std::vector<std::uint8_t>& labels, std::size_t label_extent) {
    if (intensity.rank() != 4 || intensity.extent(0) != 1)
        throw ConfigError("augment: expected a [1,E,E,E] intensity patch");
    if (labels.size() != label_extent * label_extent * label_extent)
        throw ConfigError("augment: label patch size mismatch");
    if ((intensity.extent(1) - label_extent) % 2 != 0)
        throw ConfigError("augment: patches are not co-centered");

    for (const Technique& t : plan.techniques) {
        switch (t.kind) {
            case TechniqueKind::Scale:
            case TechniqueKind::Rotate:
            case TechniqueKind::Elastic:
                apply_geometric(t, intensity, labels, label_extent);
                break;
            case TechniqueKind::Blur:
                gaussian_blur(intensity, t.sigma);
                break;
            case TechniqueKind::IntensityShift:
                for (std::size_t i = 0; i < intensity.numel(); ++i)
                    intensity[i] += static_cast<float>(t.shift);
                break;
            case TechniqueKind::LowDoseNoise:
                apply_low_dose_noise(t, spec, intensity);
                break;
        }
    }
}

}  // namespace sseg
