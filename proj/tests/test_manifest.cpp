#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "radar/errors.hpp"
#include "radar/manifest.hpp"

namespace fs = std::filesystem;
using namespace radar;
using namespace radar::manifest;

namespace {

DatasetManifest sample_manifest() {
    DatasetManifest m;
    Entry a;
    a.image_path = "images/orig_000.ppm";
    a.caption = "scene with shapes";
    a.mask_records.push_back({1, "masks/m_000_1o.pgm", "masks/m_000_1e.pgm", "blob",
                              12.5, {30.25, 41.75}});
    a.mask_records.push_back({2, "masks/m_000_2o.pgm", "masks/m_000_2e.pgm", "ridge",
                              3.0, {10.0, 12.0}});
    a.tampered.push_back({"pi-soft", "images/t_000_1_soft.ppm", 1});
    a.tampered.push_back({"pi-noisy", "images/t_000_2_noisy.ppm", 2});
    Entry b;
    b.image_path = "images/orig_001.ppm";
    b.caption = "second scene";
    b.safety_flag = true;
    m.entries = {a, b};
    return m;
}

}  // namespace

TEST_CASE("manifest json round trip preserves every field") {
    const DatasetManifest m = sample_manifest();
    const fs::path path = fs::temp_directory_path() / "radar-test-manifest.json";
    write_manifest(m, path);
    const DatasetManifest back = read_manifest(path);
    CHECK(back == m);

    // a second write of the reread manifest is byte-identical
    const fs::path path2 = fs::temp_directory_path() / "radar-test-manifest2.json";
    write_manifest(back, path2);
    std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
    std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(s1 == s2);
    fs::remove(path);
    fs::remove(path2);
}

TEST_CASE("manifest validation rejects duplicates and dangling references") {
    DatasetManifest m = sample_manifest();
    CHECK_NOTHROW(m.validate());

    DatasetManifest dup_image = m;
    dup_image.entries[1].image_path = dup_image.entries[0].image_path;
    CHECK_THROWS_AS(dup_image.validate(), ValidationError);

    DatasetManifest dup_number = m;
    dup_number.entries[0].mask_records[1].mask_number = 1;
    CHECK_THROWS_AS(dup_number.validate(), ValidationError);

    DatasetManifest dup_mask_path = m;
    dup_mask_path.entries[0].mask_records[1].original_mask_path =
        dup_mask_path.entries[0].mask_records[0].original_mask_path;
    CHECK_THROWS_AS(dup_mask_path.validate(), ValidationError);

    DatasetManifest dup_tampered = m;
    dup_tampered.entries[0].tampered[1].path = dup_tampered.entries[0].tampered[0].path;
    CHECK_THROWS_AS(dup_tampered.validate(), ValidationError);

    DatasetManifest dangling = m;
    dangling.entries[0].tampered[0].mask_number = 9;
    CHECK_THROWS_AS(dangling.validate(), ValidationError);
}

TEST_CASE("manifest reader reports malformed files") {
    const fs::path path = fs::temp_directory_path() / "radar-test-manifest-bad.json";
    CHECK_THROWS_AS(read_manifest(fs::temp_directory_path() / "radar-no-such-file.json"),
                    ParseError);
    {
        std::ofstream out(path);
        out << "{ broken";
    }
    CHECK_THROWS_AS(read_manifest(path), ParseError);
    {
        std::ofstream out(path);
        out << "{\"entries\": 3}";
    }
    CHECK_THROWS_AS(read_manifest(path), ParseError);
    {
        std::ofstream out(path);
        out << "[{\"caption\": \"missing image path\"}]";
    }
    CHECK_THROWS_AS(read_manifest(path), ParseError);
    fs::remove(path);
}
