#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "radar/image.hpp"
#include "radar/training.hpp"

namespace radar::evaluation {

// Detection AUC via the Mann-Whitney statistic with midranks for ties.
// Throws invalid-argument unless both classes are present.
Scalar roc_auc(const std::vector<Scalar>& scores, const std::vector<int>& labels);

struct F1Iou {
    Scalar f1 = 0, iou = 0;
};

// Pixel metrics after binarising the prediction at 0.5 (strict). An empty
// prediction against an empty mask scores 1.0 on both.
F1Iou f1_iou(const Plane& pred, const Mask& gt);

enum class PerturbKind { None, Jpeg, Resize, Blur };

// Robustness grid: jpeg quality {80, 70}, resize scale {0.75, 0.50} with the
// downscaled image fed directly to the model, blur variance {10, 5} applied
// as a Gaussian with sigma = sqrt(level). Any other level is rejected.
struct PerturbSpec {
    PerturbKind kind = PerturbKind::None;
    Scalar level = 0;

    // Parses "none", "jpeg:80", "resize:0.75", "blur:10".
    static PerturbSpec parse(const std::string& text);
    std::string name() const;
    void validate() const;
};

std::vector<PerturbSpec> standard_perturbations();  // none + the full grid

Image apply_perturbation(const Image& image, const PerturbSpec& spec);

struct ImageEval {
    std::string id;
    bool tampered = false;
    Scalar score = 0;
    bool detected = false;
    Scalar f1 = 0, iou = 0;  // tampered images only
};

struct EvalReport {
    std::string perturbation;
    Index images = 0, tampered_images = 0;
    Scalar auc = 0, accuracy = 0, mean_f1 = 0, mean_iou = 0;
    std::vector<ImageEval> per_image;
};

// Scores every image in the dataset (originals negative, tampered positive).
// Tamper maps are produced at the ground-truth mask resolution, so resized
// inputs are still judged against the full-size mask.
EvalReport evaluate_dataset(const training::Model& model,
                            const std::vector<training::TrainGroup>& dataset,
                            const PerturbSpec& perturb);

nlohmann::ordered_json report_to_json(const EvalReport& report);
void write_report_json(const EvalReport& report, const std::filesystem::path& path);

inline constexpr const char* kReportCsvHeader =
    "perturbation,images,tampered_images,auc,accuracy,mean_f1,mean_iou";
std::string report_csv_row(const EvalReport& report);
void write_reports_csv(const std::vector<EvalReport>& reports, const std::filesystem::path& path);

}  // namespace radar::evaluation
