#include "radar/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "radar/clients.hpp"
#include "radar/datagen.hpp"
#include "radar/errors.hpp"
#include "radar/evaluation.hpp"
#include "radar/image.hpp"
#include "radar/maskgen.hpp"
#include "radar/manifest.hpp"
#include "radar/rng.hpp"
#include "radar/synth.hpp"
#include "radar/training.hpp"

namespace radar::cli {

namespace fs = std::filesystem;

namespace {

std::string fmt(Scalar v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string zero_pad(Index value, int width) {
    std::string s = std::to_string(value);
    while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
    return s;
}

std::vector<fs::path> list_ppm(const fs::path& dir) {
    if (!fs::is_directory(dir))
        throw std::invalid_argument("not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".ppm") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    return files;
}

Scalar mask_area_fraction(const Mask& mask) {
    Scalar set = 0;
    for (Index y = 0; y < mask.rows(); ++y)
        for (Index x = 0; x < mask.cols(); ++x) set += mask(y, x) ? 1 : 0;
    return set / static_cast<Scalar>(mask.rows() * mask.cols());
}

Image read_image_any(const fs::path& path) {
    const std::string ext = path.extension().string();
    if (ext == ".ppm") return read_ppm(path);
    if (ext == ".jpg" || ext == ".jpeg") {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw NotFoundError("cannot open image: " + path.string());
        std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
        return jpeg_decode(bytes);
    }
    throw std::invalid_argument("unsupported image format (expected .ppm or .jpg): " +
                                path.string());
}

training::TrainConfig config_from_options(const std::optional<fs::path>& config_path,
                                          const std::optional<std::uint64_t>& seed) {
    training::TrainConfig config;
    if (config_path) config = training::TrainConfig::load(*config_path);
    if (seed) config.seed = *seed;
    config.validate();
    return config;
}

std::string sanitize(const std::string& text) {
    std::string out;
    for (char c : text)
        out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '-');
    return out;
}

}  // namespace

int exit_code_for_current_exception() {
    try {
        throw;
    } catch (const TrainingDivergence&) {
        return kExitDivergence;
    } catch (const ExternalServiceError&) {
        return kExitExternal;
    } catch (const std::invalid_argument&) {
        return kExitUsage;
    } catch (const ConfigurationError&) {
        return kExitUsage;
    } catch (const ParseError&) {
        return kExitUsage;
    } catch (const ValidationError&) {
        return kExitUsage;
    } catch (const NotFoundError&) {
        return kExitUsage;
    } catch (const GenerationError&) {
        return kExitUsage;
    } catch (const fs::filesystem_error&) {
        return kExitUsage;
    } catch (...) {
        return 1;
    }
}

CommandResult cmd_gen_base(const GenBaseOptions& opt) {
    if (opt.count < 1) throw std::invalid_argument("--count must be at least 1");
    if (opt.size < 8) throw std::invalid_argument("--size must be at least 8");
    fs::create_directories(opt.out);
    CommandResult res;
    for (Index i = 0; i < opt.count; ++i) {
        const Image img =
            synth::generate_base_image(opt.size, opt.size, mix_seed(opt.seed, static_cast<std::uint64_t>(i)));
        const fs::path path = opt.out / ("base-" + zero_pad(i, 4) + ".ppm");
        write_ppm(img, path);
        res.artifacts.push_back(path.string());
    }
    res.summary = "generated " + std::to_string(opt.count) + " base images in " +
                  opt.out.string();
    return res;
}

CommandResult cmd_gen_masks(const GenMasksOptions& opt) {
    if (opt.masks_per_image < 1)
        throw std::invalid_argument("--masks-per-image must be at least 1");
    const std::vector<fs::path> files = list_ppm(opt.images_dir);
    if (files.empty())
        throw std::invalid_argument("no .ppm images found in " + opt.images_dir.string());

    std::unique_ptr<clients::ProposerClient> proposer;
    if (opt.proposer == "stub") {
        proposer = std::make_unique<clients::StubProposer>();
    } else if (opt.proposer == "http") {
        proposer = std::make_unique<clients::HttpProposer>(clients::HttpClientConfig{
            clients::url_from_env("RADAR_PROPOSER_URL", "http://127.0.0.1:8801")});
    } else {
        throw std::invalid_argument("--proposer must be stub or http");
    }
    std::unique_ptr<clients::SegmenterClient> segmenter;
    if (opt.segmenter == "stub") {
        segmenter = std::make_unique<clients::StubSegmenter>(opt.seed);
    } else if (opt.segmenter == "http") {
        segmenter = std::make_unique<clients::HttpSegmenter>(clients::HttpClientConfig{
            clients::url_from_env("RADAR_SEGMENTER_URL", "http://127.0.0.1:8802")});
    } else {
        throw std::invalid_argument("--segmenter must be stub or http");
    }

    fs::create_directories(opt.out / "images");
    fs::create_directories(opt.out / "masks");
    std::ofstream rejects(opt.out / "rejected.log", std::ios::binary);

    manifest::DatasetManifest man;
    Index total_masks = 0, rejected = 0;
    for (const fs::path& file : files) {
        const Image img = read_ppm(file);
        const std::string name = file.filename().string();
        const std::string stem = file.stem().string();
        fs::copy_file(file, opt.out / "images" / name, fs::copy_options::overwrite_existing);

        const clients::ObjectProposal proposal = proposer->propose(img);
        manifest::Entry entry;
        entry.image_path = "images/" + name;
        entry.caption = proposal.caption;

        int mask_no = 0;
        for (const std::string& object : proposal.names) {
            if (static_cast<Index>(entry.mask_records.size()) >= opt.masks_per_image) break;
            Mask mask;
            try {
                mask = segmenter->segment(img, object);
            } catch (const NotFoundError&) {
                rejects << name << "\t" << object << "\tno mask produced\n";
                ++rejected;
                continue;
            }
            const maskgen::AreaFilterResult area = maskgen::filter_mask_by_area(mask);
            if (!area.accepted) {
                rejects << name << "\t" << object << "\tarea " << fmt(100 * area.area_fraction)
                        << "% outside the accepted range\n";
                ++rejected;
                continue;
            }
            const maskgen::CohesionResult cohesion = maskgen::cohere_mask(mask);

            ++mask_no;
            const std::string orig_rel = "masks/" + stem + "-m" + std::to_string(mask_no) + ".pgm";
            const std::string edit_rel =
                "masks/" + stem + "-m" + std::to_string(mask_no) + "-edited.pgm";
            write_mask_pgm(mask, opt.out / orig_rel);
            write_mask_pgm(cohesion.mask, opt.out / edit_rel);

            manifest::MaskRecord rec;
            rec.mask_number = mask_no;
            rec.original_mask_path = orig_rel;
            rec.edited_mask_path = edit_rel;
            rec.masked_object = object;
            rec.area_percentage = 100 * mask_area_fraction(cohesion.mask);
            rec.centroid = maskgen::mask_centroid(cohesion.mask);
            entry.mask_records.push_back(std::move(rec));
            ++total_masks;
        }
        if (entry.mask_records.empty()) {
            rejects << name << "\t-\tno usable mask for any proposed object\n";
            ++rejected;
            continue;
        }
        man.entries.push_back(std::move(entry));
    }

    if (man.entries.empty())
        throw GenerationError("no image produced a usable mask; see rejected.log");
    man.validate();
    const fs::path manifest_path = opt.out / "manifest.json";
    manifest::write_manifest(man, manifest_path);

    CommandResult res;
    res.artifacts.push_back(manifest_path.string());
    res.summary = std::to_string(man.entries.size()) + " entries, " +
                  std::to_string(total_masks) + " masks accepted, " + std::to_string(rejected) +
                  " rejections logged";
    return res;
}

CommandResult cmd_gen_data(const GenDataOptions& opt) {
    if (opt.inpainters.empty()) throw std::invalid_argument("--inpainters must not be empty");
    if (opt.p_random < 0 || opt.p_random > 1)
        throw std::invalid_argument("--p-random must lie in [0, 1]");

    struct Runner {
        std::string id;
        std::function<Image(const Image&, const Mask&, const std::string&, std::uint64_t)> run;
    };
    std::vector<Runner> runners;
    std::set<std::string> seen;
    std::shared_ptr<clients::HttpInpainter> http;
    for (const std::string& token : opt.inpainters) {
        Runner r;
        if (token.rfind("http:", 0) == 0) {
            const std::string id = token.substr(5);
            if (id.empty()) throw std::invalid_argument("http inpainter needs an id: " + token);
            http = std::make_shared<clients::HttpInpainter>(
                clients::HttpClientConfig{
                    clients::url_from_env("RADAR_INPAINTER_URL", "http://127.0.0.1:8803")},
                id);
            r.id = id;
            r.run = [http](const Image& img, const Mask& mask, const std::string& caption,
                           std::uint64_t) { return http->inpaint(img, mask, caption); };
        } else {
            const datagen::PseudoInpainterParams preset = datagen::pseudo_inpainter_preset(token);
            r.id = preset.id;
            r.run = [preset](const Image& img, const Mask& mask, const std::string&,
                             std::uint64_t seed) {
                datagen::PseudoInpainterParams p = preset;
                p.seed = seed;
                return datagen::pseudo_inpaint(img, mask, p);
            };
        }
        if (!seen.insert(r.id).second)
            throw std::invalid_argument("duplicate inpainter id: " + r.id);
        runners.push_back(std::move(r));
    }

    const fs::path dir = opt.manifest_path.parent_path();
    manifest::DatasetManifest man = manifest::read_manifest(opt.manifest_path);
    fs::create_directories(dir / "tampered");
    fs::create_directories(dir / "masks");

    Index written = 0, skipped = 0, failed = 0;
    std::string first_failure;
    for (std::size_t entry_idx = 0; entry_idx < man.entries.size(); ++entry_idx) {
        manifest::Entry& entry = man.entries[entry_idx];
        if (!entry.tampered.empty()) {
            ++skipped;
            continue;
        }
        try {
            const Image image = read_ppm(dir / entry.image_path);
            const std::string stem = fs::path(entry.image_path).stem().string();
            int next_number = 0;
            for (const auto& mr : entry.mask_records)
                next_number = std::max(next_number, mr.mask_number);

            const std::vector<manifest::MaskRecord> snapshot = entry.mask_records;
            for (const manifest::MaskRecord& record : snapshot) {
                if (record.masked_object == "random-polygon") continue;

                const manifest::MaskRecord* use = &record;
                manifest::MaskRecord polygon;
                Rng swap_rng = make_rng(opt.seed, "mask-swap",
                                        mix_seed(static_cast<std::uint64_t>(entry_idx),
                                                 static_cast<std::uint64_t>(record.mask_number)));
                if (std::uniform_real_distribution<Scalar>(0, 1)(swap_rng) < opt.p_random) {
                    const Mask edited = read_mask_pgm(dir / record.edited_mask_path);
                    const Scalar target = mask_area_fraction(edited);
                    const Mask poly = maskgen::random_polygon_mask(
                        image.height(), image.width(), target,
                        make_rng(opt.seed, "polygon",
                                 mix_seed(static_cast<std::uint64_t>(entry_idx),
                                          static_cast<std::uint64_t>(record.mask_number)))());
                    ++next_number;
                    polygon.mask_number = next_number;
                    polygon.original_mask_path =
                        "masks/" + stem + "-m" + std::to_string(next_number) + ".pgm";
                    polygon.edited_mask_path =
                        "masks/" + stem + "-m" + std::to_string(next_number) + "-edited.pgm";
                    polygon.masked_object = "random-polygon";
                    polygon.area_percentage = 100 * mask_area_fraction(poly);
                    polygon.centroid = maskgen::mask_centroid(poly);
                    write_mask_pgm(poly, dir / polygon.original_mask_path);
                    write_mask_pgm(poly, dir / polygon.edited_mask_path);
                    entry.mask_records.push_back(polygon);
                    use = &entry.mask_records.back();
                }

                const Mask mask = read_mask_pgm(dir / use->edited_mask_path);
                for (const Runner& runner : runners) {
                    const std::uint64_t seed =
                        mix_seed(mix_seed(opt.seed, static_cast<std::uint64_t>(entry_idx)),
                                 static_cast<std::uint64_t>(use->mask_number));
                    const Image tampered = runner.run(image, mask, entry.caption, seed);
                    const std::string rel = "tampered/" + stem + "-m" +
                                            std::to_string(use->mask_number) + "-" + runner.id +
                                            ".ppm";
                    write_ppm(tampered, dir / rel);
                    entry.tampered.push_back({runner.id, rel, use->mask_number});
                    ++written;
                }
            }
        } catch (const ExternalServiceError& e) {
            ++failed;
            if (first_failure.empty()) first_failure = e.what();
            entry.tampered.clear();
            continue;
        }
    }

    if (failed > 0 && written == 0)
        throw ExternalServiceError("every entry failed; first error: " + first_failure);
    man.validate();
    manifest::write_manifest(man, opt.manifest_path);

    CommandResult res;
    res.artifacts.push_back(opt.manifest_path.string());
    res.summary = std::to_string(written) + " tampered images written (" +
                  std::to_string(skipped) + " entries already populated, " +
                  std::to_string(failed) + " entries failed)";
    return res;
}

CommandResult cmd_train(const TrainOptions& opt) {
    std::optional<training::Checkpoint> resume;
    training::TrainConfig config;
    if (opt.resume) {
        resume = training::load_checkpoint(*opt.resume);
        config = resume->config;
        if (opt.config_path) config = training::TrainConfig::load(*opt.config_path);
        if (opt.seed) config.seed = *opt.seed;
        config.validate();
    } else {
        config = config_from_options(opt.config_path, opt.seed);
    }

    const manifest::DatasetManifest man = manifest::read_manifest(opt.manifest_path);
    const std::vector<training::TrainGroup> dataset =
        training::load_dataset(man, opt.manifest_path.parent_path(),
                               config.inpainters_per_group, config.ablation.mask_mode);

    fs::create_directories(opt.out);
    training::TrainOutput output = training::train(config, dataset, resume);

    const fs::path metrics_path = opt.out / "metrics.csv";
    training::write_metrics_csv(output.log, metrics_path);
    training::Checkpoint ckpt = training::make_checkpoint(
        output.model, output.optimizer, config, config.epochs, output.final_val_loss);
    const fs::path ckpt_path = opt.out / "checkpoint.bin";
    training::save_checkpoint(ckpt, ckpt_path);
    const fs::path config_path = opt.out / "config.json";
    {
        std::ofstream out(config_path, std::ios::binary);
        out << config.to_json().dump(2) << "\n";
    }

    CommandResult res;
    res.artifacts = {metrics_path.string(), ckpt_path.string(), config_path.string()};
    std::ostringstream s;
    s << "trained " << config.epochs << " epochs on " << dataset.size() << " groups";
    if (!output.log.empty()) {
        const training::EpochRow& last = output.log.back();
        s << "; final loss " << fmt(last.loss_total) << ", val auc " << fmt(last.val_auc)
          << ", val iou " << fmt(last.val_iou);
    }
    s << ", recorded val loss " << fmt(output.final_val_loss);
    res.summary = s.str();
    return res;
}

CommandResult cmd_infer(const InferOptions& opt) {
    const training::Checkpoint ckpt = training::load_checkpoint(opt.checkpoint);
    const training::Model model = training::model_from_checkpoint(ckpt);
    const Image image = read_image_any(opt.image_path);
    const heads::TamperMap map = model.infer(image, image.height(), image.width());
    const Scalar score = heads::detection_score(map);
    const bool tampered = heads::detect(map);

    CommandResult res;
    if (opt.out_map) {
        fs::create_directories(opt.out_map->parent_path().empty() ? "."
                                                                  : opt.out_map->parent_path());
        write_map_pgm(map.probabilities, *opt.out_map);
        res.artifacts.push_back(opt.out_map->string());
    }
    if (opt.out_raw) {
        write_map_raw(map.probabilities, *opt.out_raw);
        res.artifacts.push_back(opt.out_raw->string());
    }
    res.summary = "score " + fmt(score) + "\nlabel " + (tampered ? "tampered" : "clean");
    return res;
}

CommandResult cmd_eval(const EvalOptions& opt) {
    const training::Checkpoint ckpt = training::load_checkpoint(opt.checkpoint);
    const training::Model model = training::model_from_checkpoint(ckpt);
    const manifest::DatasetManifest man = manifest::read_manifest(opt.manifest_path);
    const std::vector<training::TrainGroup> dataset = training::load_dataset(
        man, opt.manifest_path.parent_path(), ckpt.config.inpainters_per_group,
        ckpt.config.ablation.mask_mode);

    std::vector<evaluation::PerturbSpec> specs;
    for (const std::string& token : opt.perturbations) {
        if (token == "all") {
            for (const auto& s : evaluation::standard_perturbations()) specs.push_back(s);
        } else {
            specs.push_back(evaluation::PerturbSpec::parse(token));
        }
    }
    if (specs.empty()) specs.push_back({evaluation::PerturbKind::None, 0});

    fs::create_directories(opt.out);
    CommandResult res;
    std::vector<evaluation::EvalReport> reports;
    std::ostringstream s;
    for (const auto& spec : specs) {
        evaluation::EvalReport report = evaluation::evaluate_dataset(model, dataset, spec);
        const fs::path path = opt.out / ("report-" + report.perturbation + ".json");
        evaluation::write_report_json(report, path);
        res.artifacts.push_back(path.string());
        s << report.perturbation << ": auc " << fmt(report.auc) << ", accuracy "
          << fmt(report.accuracy) << ", f1 " << fmt(report.mean_f1) << ", iou "
          << fmt(report.mean_iou) << "\n";
        reports.push_back(std::move(report));
    }
    const fs::path summary_path = opt.out / "summary.csv";
    evaluation::write_reports_csv(reports, summary_path);
    res.artifacts.push_back(summary_path.string());
    std::string text = s.str();
    if (!text.empty() && text.back() == '\n') text.pop_back();
    res.summary = text;
    return res;
}

CommandResult cmd_ablate(const AblateOptions& opt) {
    if (opt.rows.empty())
        throw std::invalid_argument("at least one --ablation-row is required");
    static const std::set<std::string> ablation_keys = {
        "fusion_mode", "scl_mode", "encoder_mode", "mask_mode", "attention_convention"};

    nlohmann::json base = opt.config_path
                              ? training::TrainConfig::load(*opt.config_path).to_json()
                              : training::TrainConfig{}.to_json();
    const manifest::DatasetManifest man = manifest::read_manifest(opt.manifest_path);
    fs::create_directories(opt.out);

    CommandResult res;
    std::ofstream summary(opt.out / "summary.csv", std::ios::binary);
    summary << "row,auc,accuracy,mean_f1,mean_iou\n";
    std::ostringstream text;

    for (std::size_t i = 0; i < opt.rows.size(); ++i) {
        const std::string& row = opt.rows[i];
        nlohmann::json cfgj = base;
        std::stringstream ss(row);
        std::string pair;
        while (std::getline(ss, pair, ',')) {
            const auto eq = pair.find('=');
            if (eq == std::string::npos || eq == 0)
                throw std::invalid_argument("ablation row entries must look like key=value: " +
                                            pair);
            const std::string key = pair.substr(0, eq);
            const std::string value = pair.substr(eq + 1);
            nlohmann::json parsed = nlohmann::json::parse(value, nullptr, false);
            if (parsed.is_discarded() || parsed.is_string()) parsed = value;
            if (ablation_keys.contains(key))
                cfgj["ablation"][key] = value;
            else
                cfgj[key] = parsed;
        }
        if (opt.seed) cfgj["seed"] = *opt.seed;
        const training::TrainConfig config = training::TrainConfig::from_json(cfgj);
        const std::vector<training::TrainGroup> dataset =
            training::load_dataset(man, opt.manifest_path.parent_path(),
                                   config.inpainters_per_group, config.ablation.mask_mode);

        const fs::path row_dir =
            opt.out / ("row-" + zero_pad(static_cast<Index>(i + 1), 2) + "-" + sanitize(row));
        fs::create_directories(row_dir);
        training::TrainOutput output = training::train(config, dataset);
        training::write_metrics_csv(output.log, row_dir / "metrics.csv");
        training::Checkpoint ckpt = training::make_checkpoint(
            output.model, output.optimizer, config, config.epochs, output.final_val_loss);
        training::save_checkpoint(ckpt, row_dir / "checkpoint.bin");

        std::vector<training::TrainGroup> eval_groups;
        for (Index idx : output.val_indices)
            eval_groups.push_back(dataset[static_cast<std::size_t>(idx)]);
        if (eval_groups.empty()) eval_groups = dataset;
        const evaluation::EvalReport report = evaluation::evaluate_dataset(
            output.model, eval_groups, {evaluation::PerturbKind::None, 0});
        evaluation::write_report_json(report, row_dir / "report.json");

        summary << "\"" << row << "\"," << fmt(report.auc) << "," << fmt(report.accuracy) << ","
                << fmt(report.mean_f1) << "," << fmt(report.mean_iou) << "\n";
        text << row << ": auc " << fmt(report.auc) << ", iou " << fmt(report.mean_iou) << "\n";
        res.artifacts.push_back(row_dir.string());
    }
    res.artifacts.push_back((opt.out / "summary.csv").string());
    std::string t = text.str();
    if (!t.empty() && t.back() == '\n') t.pop_back();
    res.summary = t;
    return res;
}

}  // namespace radar::cli
