#include "sseg/phantom.hpp"

#include <algorithm>
#include <cmath>

#include "sseg/rng.hpp"

namespace sseg {

PhantomSpec PhantomSpec::standard(int foreground_classes) {
    if (foreground_classes < 1 || foreground_classes > 4)
        throw ConfigError("standard phantom supports 1..4 foreground classes");
    PhantomSpec spec;
    // tetrahedral centers keep the organs well separated under jitter
    const std::array<std::array<double, 3>, 4> centers{{{0.32, 0.32, 0.32},
                                                        {0.68, 0.68, 0.32},
                                                        {0.68, 0.32, 0.68},
                                                        {0.32, 0.68, 0.68}}};
    const std::array<OrganSpec::Shape, 4> shapes{
        OrganSpec::Shape::Ellipsoid, OrganSpec::Shape::Ellipsoid, OrganSpec::Shape::Box,
        OrganSpec::Shape::Ellipsoid};
    const std::array<std::array<double, 3>, 4> radii{
        {{10, 12, 9}, {11, 9, 10}, {8, 8, 8}, {9, 10, 11}}};
    const std::array<double, 4> intensities{250, -350, 60, 350};
    for (int i = 0; i < foreground_classes; ++i) {
        OrganSpec o;
        o.shape = shapes[i];
        o.center_frac = centers[i];
        o.radii = radii[i];
        o.intensity = intensities[i];
        spec.organs.push_back(o);
    }
    return spec;
}

namespace {

struct PlacedOrgan {
    OrganSpec::Shape shape;
    std::array<double, 3> center;
    std::array<double, 3> radii;
    double intensity;

    double bounding_radius() const { return std::max({radii[0], radii[1], radii[2]}); }

    bool contains(double z, double y, double x) const {
        const double dz = z - center[0], dy = y - center[1], dx = x - center[2];
        if (shape == OrganSpec::Shape::Box)
            return std::abs(dz) <= radii[0] && std::abs(dy) <= radii[1] &&
                   std::abs(dx) <= radii[2];
        const double q = (dz / radii[0]) * (dz / radii[0]) + (dy / radii[1]) * (dy / radii[1]) +
                         (dx / radii[2]) * (dx / radii[2]);
        return q <= 1.0;
    }
};

std::vector<PlacedOrgan> place_organs(const PhantomSpec& spec, Rng& rng) {
    for (int attempt = 0; attempt < spec.max_retries; ++attempt) {
        std::vector<PlacedOrgan> placed;
        for (const OrganSpec& o : spec.organs) {
            PlacedOrgan p;
            p.shape = o.shape;
            for (int a = 0; a < 3; ++a) {
                p.center[a] = o.center_frac[a] * static_cast<double>(spec.extents[a]) +
                              rng.uniform(-spec.position_jitter, spec.position_jitter);
                p.radii[a] = o.radii[a] * (1.0 + rng.uniform(-spec.size_jitter, spec.size_jitter));
            }
            p.intensity =
                o.intensity + rng.uniform(-spec.intensity_jitter, spec.intensity_jitter);
            placed.push_back(p);
        }
        bool ok = true;
        for (std::size_t i = 0; i < placed.size() && ok; ++i) {
            for (int a = 0; a < 3; ++a)
                if (placed[i].center[a] - placed[i].radii[a] < 1.0 ||
                    placed[i].center[a] + placed[i].radii[a] >
                        static_cast<double>(spec.extents[a]) - 2.0)
                    ok = false;
            // conservative bounding-sphere disjointness
            for (std::size_t j = i + 1; j < placed.size() && ok; ++j) {
                double d2 = 0;
                for (int a = 0; a < 3; ++a) {
                    const double d = placed[i].center[a] - placed[j].center[a];
                    d2 += d * d;
                }
                if (std::sqrt(d2) <= placed[i].bounding_radius() + placed[j].bounding_radius() + 1.0)
                    ok = false;
            }
        }
        if (ok) return placed;
    }
    throw DataError("phantom: could not place disjoint organs within the retry budget");
}

}  // namespace

std::vector<PhantomVolume> generate(const PhantomSpec& spec, std::size_t n,
                                    std::uint64_t seed) {
    if (n < 1) throw ConfigError("phantom: need at least one volume");
    if (spec.organs.empty()) throw ConfigError("phantom: no organs configured");
    std::vector<PhantomVolume> out;
    Rng root(seed);
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng = root.fork(i);
        const auto organs = place_organs(spec, rng);

        PhantomVolume pv;
        pv.volume = Volume::make(spec.extents, {1, 1, 1}, Modality::CT);
        pv.labels.extents = spec.extents;
        pv.labels.spacing = {1, 1, 1};
        pv.labels.labels.assign(pv.labels.voxels(), 0);
        for (int c = 1; c <= static_cast<int>(organs.size()); ++c)
            pv.labels.annotated_classes.insert(c);

        for (std::size_t z = 0; z < spec.extents[0]; ++z)
            for (std::size_t y = 0; y < spec.extents[1]; ++y)
                for (std::size_t x = 0; x < spec.extents[2]; ++x) {
                    double mean = spec.background_intensity;
                    for (std::size_t o = 0; o < organs.size(); ++o)
                        if (organs[o].contains(static_cast<double>(z), static_cast<double>(y),
                                               static_cast<double>(x))) {
                            mean = organs[o].intensity;
                            pv.labels.at(z, y, x) = static_cast<std::uint8_t>(o + 1);
                            break;  // organs are disjoint
                        }
                    const double v = mean + rng.normal() * spec.texture_sigma;
                    pv.volume.at(z, y, x) = static_cast<float>(std::clamp(v, -500.0, 400.0));
                }
        out.push_back(std::move(pv));
    }
    return out;
}

SparseAnnotation sparsify(const SparseAnnotation& full, const std::set<int>& keep) {
    if (keep.empty()) throw ConfigError("sparsify: empty class subset");
    for (int c : keep)
        if (full.annotated_classes.count(c) == 0)
            throw ConfigError("sparsify: class " + std::to_string(c) +
                              " not annotated in the source labels");
    SparseAnnotation out = full;
    out.annotated_classes = keep;
    for (auto& l : out.labels)
        if (l != 0 && keep.count(static_cast<int>(l)) == 0) l = 0;
    return out;
}

std::vector<std::set<int>> round_robin_pattern(std::size_t n, int classes) {
    if (classes < 1) throw ConfigError("pattern: need at least one class");
    std::vector<std::set<int>> out;
    for (std::size_t i = 0; i < n; ++i)
        out.push_back({static_cast<int>(i % static_cast<std::size_t>(classes)) + 1});
    return out;
}

std::vector<std::set<int>> one_or_two_pattern(std::size_t n, int classes, std::uint64_t seed) {
    if (classes < 1) throw ConfigError("pattern: need at least one class");
    // round-robin base class so every class appears, plus a second random one
    // on every other volume
    Rng rng(seed);
    std::vector<std::set<int>> out = round_robin_pattern(n, classes);
    for (std::size_t i = 0; i < n; ++i) {
        if (classes < 2 || i % 2 == 0) continue;
        const int base = *out[i].begin();
        int extra = base;
        while (extra == base) extra = static_cast<int>(rng.below(classes)) + 1;
        out[i].insert(extra);
    }
    return out;
}

}  // namespace sseg
