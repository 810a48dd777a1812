#include "sseg/volume.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace sseg {

std::string to_string(Modality m) { return m == Modality::CT ? "CT" : "MR"; }

Modality modality_from_string(const std::string& s) {
    if (s == "CT") return Modality::CT;
    if (s == "MR") return Modality::MR;
    throw DataError("unknown modality: " + s);
}

std::string to_string(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        default: return "test";
    }
}

Split split_from_string(const std::string& s) {
    if (s == "train") return Split::Train;
    if (s == "val") return Split::Val;
    if (s == "test") return Split::Test;
    throw DataError("unknown split: " + s);
}

Volume Volume::make(std::array<std::size_t, 3> extents, std::array<double, 3> spacing,
                    Modality modality) {
    for (double s : spacing)
        if (s <= 0) throw DataError("volume spacing must be positive");
    Volume v;
    v.extents = extents;
    v.spacing = spacing;
    v.modality = modality;
    v.data.assign(v.voxels(), 0.0f);
    return v;
}

void SparseAnnotation::validate() const {
    if (annotated_classes.empty())
        throw DataError("sparse annotation has no annotated classes");
    for (std::uint8_t l : labels)
        if (l != 0 && !annotated_classes.count(static_cast<int>(l)))
            throw DataError("label value " + std::to_string(static_cast<int>(l)) +
                            " not in the annotated-class set");
}

namespace {

constexpr char kMagic[5] = {'S', 'V', 'O', 'L', '1'};

void write_blob(const std::string& path, const nlohmann::json& header, const void* payload,
                std::size_t bytes) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open for writing: " + path);
    const std::string text = header.dump();
    const std::uint64_t len = text.size();
    os.write(kMagic, sizeof kMagic);
    os.write(reinterpret_cast<const char*>(&len), sizeof len);
    os.write(text.data(), static_cast<std::streamsize>(text.size()));
    os.write(static_cast<const char*>(payload), static_cast<std::streamsize>(bytes));
    if (!os) throw DataError("failed writing: " + path);
}

nlohmann::json read_header(std::ifstream& is, const std::string& path) {
    char magic[sizeof kMagic];
    is.read(magic, sizeof magic);
    if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw DataError("not a .svol file (bad magic): " + path);
    std::uint64_t len = 0;
    is.read(reinterpret_cast<char*>(&len), sizeof len);
    std::string text(len, '\0');
    is.read(text.data(), static_cast<std::streamsize>(len));
    if (!is) throw DataError("truncated .svol header: " + path);
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed .svol header: " + std::string(e.what()));
    }
}

}  // namespace

void save_volume(const std::string& path, const Volume& v) {
    nlohmann::json header = {{"extents", v.extents},
                             {"spacing_mm", v.spacing},
                             {"modality", to_string(v.modality)},
                             {"dtype", "f32"}};
    write_blob(path, header, v.data.data(), v.data.size() * sizeof(float));
}

Volume load_volume(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open volume: " + path);
    nlohmann::json header = read_header(is, path);
    if (header.at("dtype") != "f32") throw DataError("expected f32 volume: " + path);
    Volume v = Volume::make(header.at("extents"), header.at("spacing_mm"),
                            modality_from_string(header.at("modality")));
    is.read(reinterpret_cast<char*>(v.data.data()),
            static_cast<std::streamsize>(v.data.size() * sizeof(float)));
    if (!is) throw DataError("truncated volume payload: " + path);
    return v;
}

void save_labels(const std::string& path, const SparseAnnotation& a) {
    a.validate();
    nlohmann::json header = {{"extents", a.extents},
                             {"spacing_mm", a.spacing},
                             {"modality", "CT"},
                             {"dtype", "u8"},
                             {"annotated_classes", a.annotated_classes}};
    write_blob(path, header, a.labels.data(), a.labels.size());
}

SparseAnnotation load_labels(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open labels: " + path);
    nlohmann::json header = read_header(is, path);
    if (header.at("dtype") != "u8") throw DataError("expected u8 labels: " + path);
    SparseAnnotation a;
    a.extents = header.at("extents");
    a.spacing = header.at("spacing_mm");
    a.labels.assign(a.voxels(), 0);
    if (header.contains("annotated_classes"))
        a.annotated_classes = header.at("annotated_classes").get<std::set<int>>();
    is.read(reinterpret_cast<char*>(a.labels.data()),
            static_cast<std::streamsize>(a.labels.size()));
    if (!is) throw DataError("truncated label payload: " + path);
    a.validate();
    return a;
}

std::string DatasetManifest::resolve(const std::string& path) const {
    if (base_dir.empty() || std::filesystem::path(path).is_absolute()) return path;
    return (std::filesystem::path(base_dir) / path).string();
}

std::vector<const ManifestEntry*> DatasetManifest::split_entries(Split s) const {
    std::vector<const ManifestEntry*> out;
    for (const auto& e : entries)
        if (e.split == s) out.push_back(&e);
    return out;
}

void DatasetManifest::validate() const {
    int expected = 1;
    for (const auto& [id, _] : classes) {
        if (id != expected)
            throw DataError("class ids must be dense from 1; found " + std::to_string(id) +
                            " where " + std::to_string(expected) + " was expected");
        ++expected;
    }
}

void save_manifest(const std::string& path, const DatasetManifest& m) {
    nlohmann::json classes = nlohmann::json::object();
    for (const auto& [id, name] : m.classes) classes[std::to_string(id)] = name;
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : m.entries) {
        nlohmann::json j = {{"volume", e.volume},
                            {"labels", e.labels},
                            {"source", e.source},
                            {"split", to_string(e.split)}};
        if (!e.ref_labels.empty()) j["ref_labels"] = e.ref_labels;
        entries.push_back(std::move(j));
    }
    std::ofstream os(path);
    if (!os) throw DataError("cannot open manifest for writing: " + path);
    os << nlohmann::json{{"classes", classes}, {"entries", entries}}.dump(2) << "\n";
}

DatasetManifest load_manifest(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open manifest: " + path);
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed manifest: " + std::string(e.what()));
    }
    DatasetManifest m;
    m.base_dir = std::filesystem::path(path).parent_path().string();
    for (const auto& [key, name] : j.at("classes").items())
        m.classes[std::stoi(key)] = name.get<std::string>();
    for (const auto& e : j.at("entries")) {
        ManifestEntry entry;
        entry.volume = e.at("volume");
        entry.labels = e.at("labels");
        entry.source = e.value("source", "");
        entry.split = split_from_string(e.at("split"));
        entry.ref_labels = e.value("ref_labels", "");
        m.entries.push_back(std::move(entry));
    }
    m.validate();
    return m;
}

}  // namespace sseg
