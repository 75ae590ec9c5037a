#include "radar/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "radar/errors.hpp"

namespace radar::evaluation {

namespace {

std::string fmt(Scalar v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.8g", v);
    return buf;
}

std::string level_text(Scalar level) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", level);
    return buf;
}

}  // namespace

Scalar roc_auc(const std::vector<Scalar>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw std::invalid_argument("roc_auc: scores and labels differ in length");
    std::size_t n_pos = 0, n_neg = 0;
    for (int l : labels) {
        if (l != 0 && l != 1) throw std::invalid_argument("roc_auc: labels must be 0 or 1");
        (l == 1 ? n_pos : n_neg) += 1;
    }
    if (n_pos == 0 || n_neg == 0)
        throw std::invalid_argument("roc_auc requires both classes to be present");
    for (Scalar s : scores)
        if (!std::isfinite(s)) throw std::invalid_argument("roc_auc: non-finite score");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Midranks over tied score runs; AUC from the Mann-Whitney rank sum.
    Scalar rank_sum_pos = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const Scalar midrank = (static_cast<Scalar>(i + 1) + static_cast<Scalar>(j)) / 2;
        for (std::size_t t = i; t < j; ++t)
            if (labels[order[t]] == 1) rank_sum_pos += midrank;
        i = j;
    }
    const Scalar np = static_cast<Scalar>(n_pos), nn = static_cast<Scalar>(n_neg);
    return (rank_sum_pos - np * (np + 1) / 2) / (np * nn);
}

F1Iou f1_iou(const Plane& pred, const Mask& gt) {
    if (pred.rows() != gt.rows() || pred.cols() != gt.cols())
        throw std::invalid_argument("f1_iou: prediction and mask shapes differ");
    Scalar inter = 0, pred_pos = 0, gt_pos = 0;
    for (Index y = 0; y < pred.rows(); ++y)
        for (Index x = 0; x < pred.cols(); ++x) {
            const bool p = pred(y, x) > 0.5;
            const bool t = gt(y, x) != 0;
            inter += (p && t) ? 1 : 0;
            pred_pos += p ? 1 : 0;
            gt_pos += t ? 1 : 0;
        }
    const Scalar uni = pred_pos + gt_pos - inter;
    if (uni == 0) return {1.0, 1.0};
    return {2 * inter / (pred_pos + gt_pos), inter / uni};
}

PerturbSpec PerturbSpec::parse(const std::string& text) {
    if (text == "none") return {PerturbKind::None, 0};
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw std::invalid_argument("perturbation must look like kind:level, got: " + text);
    const std::string kind = text.substr(0, colon);
    const std::string level_str = text.substr(colon + 1);
    Scalar level = 0;
    try {
        std::size_t used = 0;
        level = std::stod(level_str, &used);
        if (used != level_str.size()) throw std::invalid_argument(level_str);
    } catch (const std::exception&) {
        throw std::invalid_argument("bad perturbation level: " + level_str);
    }
    PerturbSpec spec;
    if (kind == "jpeg") spec.kind = PerturbKind::Jpeg;
    else if (kind == "resize") spec.kind = PerturbKind::Resize;
    else if (kind == "blur") spec.kind = PerturbKind::Blur;
    else throw std::invalid_argument("unknown perturbation kind: " + kind);
    spec.level = level;
    spec.validate();
    return spec;
}

std::string PerturbSpec::name() const {
    switch (kind) {
        case PerturbKind::None: return "none";
        case PerturbKind::Jpeg: return "jpeg-" + level_text(level);
        case PerturbKind::Resize: return "resize-" + level_text(level);
        case PerturbKind::Blur: return "blur-" + level_text(level);
    }
    return "none";
}

void PerturbSpec::validate() const {
    switch (kind) {
        case PerturbKind::None: return;
        case PerturbKind::Jpeg:
            if (level == 80 || level == 70) return;
            break;
        case PerturbKind::Resize:
            if (level == 0.75 || level == 0.50) return;
            break;
        case PerturbKind::Blur:
            if (level == 10 || level == 5) return;
            break;
    }
    throw std::invalid_argument("unsupported perturbation level: " + name());
}

std::vector<PerturbSpec> standard_perturbations() {
    return {{PerturbKind::None, 0},     {PerturbKind::Jpeg, 80}, {PerturbKind::Jpeg, 70},
            {PerturbKind::Resize, 0.75}, {PerturbKind::Resize, 0.50},
            {PerturbKind::Blur, 10},    {PerturbKind::Blur, 5}};
}

Image apply_perturbation(const Image& image, const PerturbSpec& spec) {
    spec.validate();
    switch (spec.kind) {
        case PerturbKind::None: return image;
        case PerturbKind::Jpeg: return jpeg_roundtrip(image, static_cast<int>(spec.level));
        case PerturbKind::Resize: {
            const Index nh = std::max<Index>(
                1, static_cast<Index>(std::lround(image.height() * spec.level)));
            const Index nw = std::max<Index>(
                1, static_cast<Index>(std::lround(image.width() * spec.level)));
            return quantize(resize_bilinear(image, nh, nw));
        }
        case PerturbKind::Blur: return quantize(gaussian_blur(image, std::sqrt(spec.level)));
    }
    return image;
}

EvalReport evaluate_dataset(const training::Model& model,
                            const std::vector<training::TrainGroup>& dataset,
                            const PerturbSpec& perturb) {
    perturb.validate();
    if (dataset.empty()) throw std::invalid_argument("evaluation dataset is empty");

    EvalReport report;
    report.perturbation = perturb.name();
    std::vector<Scalar> scores;
    std::vector<int> labels;
    Scalar correct = 0, f1_sum = 0, iou_sum = 0;

    for (const auto& tg : dataset) {
        std::vector<Image> images;
        std::vector<std::string> ids;
        if (tg.inline_group) {
            images.push_back(tg.inline_group->original_image);
            ids.push_back(tg.key + "/original");
            for (std::size_t i = 0; i < tg.inline_group->tampered_images.size(); ++i) {
                images.push_back(tg.inline_group->tampered_images[i]);
                ids.push_back(tg.key + "/tampered-" + std::to_string(i));
            }
        } else {
            images.push_back(read_ppm(tg.original_path));
            ids.push_back(tg.original_path.string());
            for (const auto& p : tg.tampered_paths) {
                images.push_back(read_ppm(p));
                ids.push_back(p.string());
            }
        }

        for (std::size_t i = 0; i < images.size(); ++i) {
            const bool tampered = i > 0;
            const Image input = apply_perturbation(images[i], perturb);
            const heads::TamperMap map = model.infer(input, tg.mask.rows(), tg.mask.cols());

            ImageEval ev;
            ev.id = ids[i];
            ev.tampered = tampered;
            ev.score = heads::detection_score(map);
            ev.detected = heads::detect(map);
            if (tampered) {
                const F1Iou m = f1_iou(map.probabilities, tg.mask);
                ev.f1 = m.f1;
                ev.iou = m.iou;
                f1_sum += m.f1;
                iou_sum += m.iou;
                ++report.tampered_images;
            }
            correct += (ev.detected == tampered) ? 1 : 0;
            scores.push_back(ev.score);
            labels.push_back(tampered ? 1 : 0);
            report.per_image.push_back(std::move(ev));
            ++report.images;
        }
    }

    report.auc = roc_auc(scores, labels);
    report.accuracy = correct / static_cast<Scalar>(report.images);
    if (report.tampered_images > 0) {
        report.mean_f1 = f1_sum / static_cast<Scalar>(report.tampered_images);
        report.mean_iou = iou_sum / static_cast<Scalar>(report.tampered_images);
    }
    return report;
}

nlohmann::ordered_json report_to_json(const EvalReport& report) {
    nlohmann::ordered_json j;
    j["perturbation"] = report.perturbation;
    j["images"] = report.images;
    j["tampered_images"] = report.tampered_images;
    j["auc"] = report.auc;
    j["accuracy"] = report.accuracy;
    j["mean_f1"] = report.mean_f1;
    j["mean_iou"] = report.mean_iou;
    nlohmann::ordered_json per = nlohmann::ordered_json::array();
    for (const auto& ev : report.per_image) {
        nlohmann::ordered_json e;
        e["id"] = ev.id;
        e["tampered"] = ev.tampered;
        e["score"] = ev.score;
        e["detected"] = ev.detected;
        if (ev.tampered) {
            e["f1"] = ev.f1;
            e["iou"] = ev.iou;
        }
        per.push_back(std::move(e));
    }
    j["per_image"] = std::move(per);
    return j;
}

void write_report_json(const EvalReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw GenerationError("cannot write report: " + path.string());
    out << report_to_json(report).dump(2) << "\n";
}

std::string report_csv_row(const EvalReport& report) {
    return report.perturbation + "," + std::to_string(report.images) + "," +
           std::to_string(report.tampered_images) + "," + fmt(report.auc) + "," +
           fmt(report.accuracy) + "," + fmt(report.mean_f1) + "," + fmt(report.mean_iou);
}

void write_reports_csv(const std::vector<EvalReport>& reports,
                       const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw GenerationError("cannot write report csv: " + path.string());
    out << kReportCsvHeader << "\n";
    for (const auto& r : reports) out << report_csv_row(r) << "\n";
}

}  // namespace radar::evaluation
