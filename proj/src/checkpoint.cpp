#include "sseg/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "json.hpp"
#include "sseg/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint and volume i/o assume a little-endian host");

namespace sseg {

namespace {

constexpr char kMagic[5] = {'S', 'S', 'E', 'G', '1'};

void write_u64(std::ostream& os, std::uint64_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t read_u64(std::istream& is) {
    std::uint64_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

nlohmann::json spec_to_json(const NetSpec& s) {
    return {{"depth", s.depth},
            {"base_filters", s.base_filters},
            {"convs_per_level", s.convs_per_level},
            {"in_channels", s.in_channels},
            {"out_classes", s.out_classes}};
}

NetSpec spec_from_json(const nlohmann::json& j) {
    NetSpec s;
    s.depth = j.at("depth");
    s.base_filters = j.at("base_filters");
    s.convs_per_level = j.at("convs_per_level");
    s.in_channels = j.at("in_channels");
    s.out_classes = j.at("out_classes");
    return s;
}

}  // namespace

void save_checkpoint(const std::string& path, const Network& net) {
    nlohmann::json manifest = nlohmann::json::array();
    for (std::size_t i = 0; i < net.size(); ++i)
        manifest.push_back({{"name", net.name(i)}, {"shape", net.tensor(i).shape()}});
    nlohmann::json header = {
        {"format_version", 1}, {"net_spec", spec_to_json(net.spec())}, {"parameters", manifest}};
    const std::string header_text = header.dump();

    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open checkpoint for writing: " + path);
    os.write(kMagic, sizeof kMagic);
    write_u64(os, header_text.size());
    os.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
    for (std::size_t i = 0; i < net.size(); ++i) {
        const auto& t = net.tensor(i);
        os.write(reinterpret_cast<const char*>(t.data()),
                 static_cast<std::streamsize>(t.numel() * sizeof(float)));
    }
    if (!os) throw DataError("failed writing checkpoint: " + path);
}

Network load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open checkpoint: " + path);
    char magic[sizeof kMagic];
    is.read(magic, sizeof magic);
    if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw DataError("not a checkpoint file (bad magic): " + path);
    const std::uint64_t header_len = read_u64(is);
    std::string header_text(header_len, '\0');
    is.read(header_text.data(), static_cast<std::streamsize>(header_len));
    if (!is) throw DataError("truncated checkpoint header: " + path);

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(header_text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed checkpoint header: " + std::string(e.what()));
    }
    if (header.at("format_version") != 1)
        throw DataError("unsupported checkpoint format version");

    NetSpec spec = spec_from_json(header.at("net_spec"));
    std::vector<std::pair<std::string, Tensor>> params;
    for (const auto& entry : header.at("parameters")) {
        std::vector<std::size_t> shape = entry.at("shape");
        Tensor t(shape);
        is.read(reinterpret_cast<char*>(t.data()),
                static_cast<std::streamsize>(t.numel() * sizeof(float)));
        if (!is) throw DataError("truncated checkpoint payload: " + path);
        params.emplace_back(entry.at("name"), std::move(t));
    }
    return Network(spec, std::move(params));
}

}  // namespace sseg
