#include "sseg/unet.hpp"

#include <cmath>
#include <sstream>

namespace sseg {

namespace {

struct Trace {
    bool feasible = false;
    std::string violation;  // first violated level, empty if feasible
    PatchGeometry geometry;
};

Trace trace_geometry(const NetSpec& spec, std::size_t input_extent) {
    Trace t;
    t.geometry.input_extent = input_extent;
    const std::size_t shrink = 2 * static_cast<std::size_t>(spec.convs_per_level);

    std::size_t e = input_extent;
    for (int level = 0; level < spec.depth; ++level) {
        if (level > 0) {
            if (e % 2 != 0) {
                t.violation = "pre-pool extent " + std::to_string(e) + " at encoder level " +
                              std::to_string(level - 1) + " is odd";
                return t;
            }
            e /= 2;
        }
        if (e < shrink + 1) {
            t.violation = "extent " + std::to_string(e) + " at encoder level " +
                          std::to_string(level) + " too small for the conv pair";
            return t;
        }
        e -= shrink;
        t.geometry.encoder_extents.push_back(e);
    }
    for (int level = spec.depth - 2; level >= 0; --level) {
        e *= 2;
        const std::size_t skip = t.geometry.encoder_extents[level];
        if (skip < e || (skip - e) % 2 != 0) {
            t.violation = "skip extent " + std::to_string(skip) + " at decoder level " +
                          std::to_string(level) + " cannot be center-cropped to " +
                          std::to_string(e);
            return t;
        }
        t.geometry.crop_margins.push_back((skip - e) / 2);
        if (e < shrink + 1) {
            t.violation = "extent " + std::to_string(e) + " at decoder level " +
                          std::to_string(level) + " too small for the conv pair";
            return t;
        }
        e -= shrink;
        t.geometry.decoder_extents.push_back(e);
    }
    t.geometry.output_extent = e;
    t.feasible = true;
    return t;
}

}  // namespace

std::size_t min_feasible_extent(const NetSpec& spec, std::size_t at_least) {
    for (std::size_t e = at_least; e < at_least + 4096; ++e)
        if (trace_geometry(spec, e).feasible) return e;
    throw GeometryError("no feasible input extent found for this spec");
}

PatchGeometry compute_valid_geometry(const NetSpec& spec, std::size_t input_extent) {
    if (spec.depth < 2 || spec.base_filters < 1)
        throw ConfigError("invalid NetSpec: depth >= 2 and base_filters >= 1 required");
    Trace t = trace_geometry(spec, input_extent);
    if (!t.feasible) {
        std::ostringstream os;
        os << "input extent " << input_extent << " is infeasible: " << t.violation;
        std::size_t below = 0;
        for (std::size_t e = input_extent; e-- > 1;)
            if (trace_geometry(spec, e).feasible) {
                below = e;
                break;
            }
        std::size_t above = 0;
        for (std::size_t e = input_extent + 1; e < input_extent + 4096; ++e)
            if (trace_geometry(spec, e).feasible) {
                above = e;
                break;
            }
        os << "; nearest feasible extents:";
        if (below) os << " " << below;
        if (above) os << " " << above;
        throw GeometryError(os.str());
    }
    return t.geometry;
}

std::vector<std::string> layer_names(const NetSpec& spec) {
    std::vector<std::string> names;
    auto block = [&](const std::string& prefix) {
        for (int i = 0; i < spec.convs_per_level; ++i)
            names.push_back(prefix + ".conv" + std::to_string(i));
    };
    for (int level = 0; level < spec.depth; ++level) block("enc" + std::to_string(level));
    for (int level = spec.depth - 2; level >= 0; --level) {
        const std::string prefix = "dec" + std::to_string(level);
        names.push_back(prefix + ".up");
        block(prefix);
    }
    names.push_back("out");
    return names;
}

namespace {

Tensor glorot_uniform(std::vector<std::size_t> shape, std::size_t fan_in, std::size_t fan_out,
                      Rng& rng) {
    const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.numel(); ++i)
        t[i] = static_cast<float>(rng.uniform(-a, a));
    return t;
}

}  // namespace

Network build_network(const NetSpec& spec, std::uint64_t seed) {
    compute_valid_geometry(spec, min_feasible_extent(spec));  // validates the spec itself
    Rng rng(seed);
    std::vector<std::pair<std::string, Tensor>> params;

    auto add_conv = [&](const std::string& name, std::size_t cin, std::size_t cout,
                        std::size_t k) {
        const std::size_t kv = k * k * k;
        params.emplace_back(name + ".weight",
                            glorot_uniform({cout, cin, k, k, k}, cin * kv, cout * kv, rng));
        params.emplace_back(name + ".bias", Tensor({cout}));
    };
    auto add_upconv = [&](const std::string& name, std::size_t cin, std::size_t cout) {
        params.emplace_back(name + ".weight",
                            glorot_uniform({cin, cout, 2, 2, 2}, cin * 8, cout * 8, rng));
        params.emplace_back(name + ".bias", Tensor({cout}));
    };
    auto add_block = [&](const std::string& prefix, std::size_t cin, std::size_t cout) {
        for (int i = 0; i < spec.convs_per_level; ++i) {
            add_conv(prefix + ".conv" + std::to_string(i), i == 0 ? cin : cout, cout, 3);
        }
    };

    std::size_t prev = static_cast<std::size_t>(spec.in_channels);
    for (int level = 0; level < spec.depth; ++level) {
        const std::size_t f = static_cast<std::size_t>(spec.filters_at(level));
        add_block("enc" + std::to_string(level), prev, f);
        prev = f;
    }
    for (int level = spec.depth - 2; level >= 0; --level) {
        const std::string prefix = "dec" + std::to_string(level);
        const std::size_t f = static_cast<std::size_t>(spec.filters_at(level));
        add_upconv(prefix + ".up", prev, f);
        add_block(prefix, 2 * f, f);
        prev = f;
    }
    add_conv("out", prev, static_cast<std::size_t>(spec.out_classes), 1);
    return Network(spec, std::move(params));
}

}  // namespace sseg
