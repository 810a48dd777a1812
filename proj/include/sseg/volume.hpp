#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sseg/errors.hpp"

namespace sseg {

enum class Modality { CT, MR };

std::string to_string(Modality m);
Modality modality_from_string(const std::string& s);

// 3-D scalar grid with physical spacing, z-major storage
// (index = (z * Y + y) * X + x).
struct Volume {
    std::array<std::size_t, 3> extents{};  // z, y, x
    std::array<double, 3> spacing{1, 1, 1};  // mm per voxel
    Modality modality = Modality::CT;
    std::vector<float> data;

    std::size_t voxels() const { return extents[0] * extents[1] * extents[2]; }
    std::size_t index(std::size_t z, std::size_t y, std::size_t x) const {
        return (z * extents[1] + y) * extents[2] + x;
    }
    float at(std::size_t z, std::size_t y, std::size_t x) const { return data[index(z, y, x)]; }
    float& at(std::size_t z, std::size_t y, std::size_t x) { return data[index(z, y, x)]; }

    static Volume make(std::array<std::size_t, 3> extents, std::array<double, 3> spacing,
                       Modality modality);
};

// Per-volume label grid plus the set of classes annotated by protocol
// (the delta flags). Label 0 means unannotated/unknown.
struct SparseAnnotation {
    std::array<std::size_t, 3> extents{};
    std::array<double, 3> spacing{1, 1, 1};
    std::vector<std::uint8_t> labels;
    std::set<int> annotated_classes;

    std::size_t voxels() const { return extents[0] * extents[1] * extents[2]; }
    std::size_t index(std::size_t z, std::size_t y, std::size_t x) const {
        return (z * extents[1] + y) * extents[2] + x;
    }
    std::uint8_t at(std::size_t z, std::size_t y, std::size_t x) const {
        return labels[index(z, y, x)];
    }
    std::uint8_t& at(std::size_t z, std::size_t y, std::size_t x) {
        return labels[index(z, y, x)];
    }

    // every nonzero label must be in annotated_classes, which must be nonempty
    void validate() const;
};

// .svol: magic "SVOL1", LE u64 header length, canonical JSON header, raw
// little-endian payload in z-major order. Intensities are f32, labels u8.
void save_volume(const std::string& path, const Volume& v);
Volume load_volume(const std::string& path);
void save_labels(const std::string& path, const SparseAnnotation& a);
SparseAnnotation load_labels(const std::string& path);

enum class Split { Train, Val, Test };
std::string to_string(Split s);
Split split_from_string(const std::string& s);

struct ManifestEntry {
    std::string volume;
    std::string labels;
    std::string ref_labels;  // optional full ground truth for evaluation
    std::string source;
    Split split = Split::Train;
};

struct DatasetManifest {
    std::map<int, std::string> classes;  // dense ids from 1; 0 reserved
    std::vector<ManifestEntry> entries;
    std::string base_dir;  // set on load; entry paths are relative to it

    std::string resolve(const std::string& path) const;
    std::vector<const ManifestEntry*> split_entries(Split s) const;
    void validate() const;
};

void save_manifest(const std::string& path, const DatasetManifest& m);
DatasetManifest load_manifest(const std::string& path);

}  // namespace sseg
