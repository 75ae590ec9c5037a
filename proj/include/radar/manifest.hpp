#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "radar/types.hpp"

namespace radar::manifest {

struct MaskRecord {
    int mask_number = 0;
    std::string original_mask_path;
    std::string edited_mask_path;
    std::string masked_object;
    Scalar area_percentage = 0;
    std::pair<Scalar, Scalar> centroid{0, 0};  // (row, col)

    bool operator==(const MaskRecord&) const = default;
};

struct TamperedRecord {
    std::string inpainter_id;
    std::string path;
    int mask_number = 0;

    bool operator==(const TamperedRecord&) const = default;
};

struct Entry {
    std::string image_path;
    std::string caption;
    std::vector<MaskRecord> mask_records;
    std::vector<TamperedRecord> tampered;
    bool safety_flag = false;

    bool operator==(const Entry&) const = default;
};

struct DatasetManifest {
    std::vector<Entry> entries;

    bool operator==(const DatasetManifest&) const = default;
    // Checks path uniqueness and that every tampered record references an
    // existing mask_number; throws validation-error.
    void validate() const;
};

void write_manifest(const DatasetManifest& m, const std::filesystem::path& path);
DatasetManifest read_manifest(const std::filesystem::path& path);

}  // namespace radar::manifest
