#include "radar/manifest.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "radar/errors.hpp"

namespace radar::manifest {

using ordered_json = nlohmann::ordered_json;

void DatasetManifest::validate() const {
    std::set<std::string> paths;
    for (const Entry& e : entries) {
        if (!paths.insert(e.image_path).second)
            throw ValidationError("duplicate image path in manifest: " + e.image_path);
        std::set<int> mask_numbers;
        for (const MaskRecord& m : e.mask_records) {
            if (!mask_numbers.insert(m.mask_number).second)
                throw ValidationError("duplicate mask_number in entry " + e.image_path);
            for (const std::string* p : {&m.original_mask_path, &m.edited_mask_path})
                if (!p->empty() && !paths.insert(*p).second)
                    throw ValidationError("duplicate mask path in manifest: " + *p);
        }
        for (const TamperedRecord& t : e.tampered) {
            if (!paths.insert(t.path).second)
                throw ValidationError("duplicate tampered path in manifest: " + t.path);
            if (!mask_numbers.count(t.mask_number))
                throw ValidationError("tampered record references unknown mask_number in " +
                                      e.image_path);
        }
    }
}

void write_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
    m.validate();
    ordered_json root = ordered_json::array();
    for (const Entry& e : m.entries) {
        ordered_json je;
        je["image_path"] = e.image_path;
        je["caption"] = e.caption;
        je["mask_records"] = ordered_json::array();
        for (const MaskRecord& r : e.mask_records) {
            ordered_json jr;
            jr["mask_number"] = r.mask_number;
            jr["original_mask_path"] = r.original_mask_path;
            jr["edited_mask_path"] = r.edited_mask_path;
            jr["masked_object"] = r.masked_object;
            jr["area_percentage"] = r.area_percentage;
            jr["centroid"] = {r.centroid.first, r.centroid.second};
            je["mask_records"].push_back(std::move(jr));
        }
        je["tampered"] = ordered_json::array();
        for (const TamperedRecord& t : e.tampered) {
            ordered_json jt;
            jt["inpainter_id"] = t.inpainter_id;
            jt["path"] = t.path;
            jt["mask_number"] = t.mask_number;
            je["tampered"].push_back(std::move(jt));
        }
        je["safety_flag"] = e.safety_flag;
        root.push_back(std::move(je));
    }
    std::ofstream out(path);
    if (!out) throw GenerationError("cannot write manifest to " + path.string());
    out << root.dump(2) << '\n';
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open manifest " + path.string());
    ordered_json root;
    try {
        in >> root;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("manifest is not valid JSON: ") + e.what());
    }

    DatasetManifest m;
    try {
        if (!root.is_array()) throw ParseError("manifest root must be an array");
        for (const auto& je : root) {
            Entry e;
            e.image_path = je.at("image_path").get<std::string>();
            e.caption = je.at("caption").get<std::string>();
            for (const auto& jr : je.at("mask_records")) {
                MaskRecord r;
                r.mask_number = jr.at("mask_number").get<int>();
                r.original_mask_path = jr.at("original_mask_path").get<std::string>();
                r.edited_mask_path = jr.at("edited_mask_path").get<std::string>();
                r.masked_object = jr.at("masked_object").get<std::string>();
                r.area_percentage = jr.at("area_percentage").get<Scalar>();
                const auto& c = jr.at("centroid");
                if (!c.is_array() || c.size() != 2)
                    throw ParseError("centroid must be a [row, col] pair");
                r.centroid = {c[0].get<Scalar>(), c[1].get<Scalar>()};
                e.mask_records.push_back(std::move(r));
            }
            for (const auto& jt : je.at("tampered")) {
                TamperedRecord t;
                t.inpainter_id = jt.at("inpainter_id").get<std::string>();
                t.path = jt.at("path").get<std::string>();
                t.mask_number = jt.at("mask_number").get<int>();
                e.tampered.push_back(std::move(t));
            }
            e.safety_flag = je.at("safety_flag").get<bool>();
            m.entries.push_back(std::move(e));
        }
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError(std::string("manifest schema violation: ") + ex.what());
    }
    m.validate();
    return m;
}

}  // namespace radar::manifest
