#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "radar/cli.hpp"

namespace {

using radar::cli::CommandResult;

int run(CLI::App& app, int argc, char** argv, const std::function<CommandResult()>& dispatch) {
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : radar::cli::kExitUsage;
    }
    try {
        const CommandResult result = dispatch();
        if (!result.summary.empty()) std::cout << result.summary << "\n";
        return result.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return radar::cli::exit_code_for_current_exception();
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"inpainting forgery detection and localisation pipeline"};
    app.require_subcommand(1);

    radar::cli::GenBaseOptions gen_base;
    radar::cli::GenMasksOptions gen_masks;
    radar::cli::GenDataOptions gen_data;
    radar::cli::TrainOptions train;
    radar::cli::InferOptions infer;
    radar::cli::EvalOptions eval;
    radar::cli::AblateOptions ablate;

    std::string train_config, train_resume, infer_map, infer_raw, ablate_config;
    std::uint64_t train_seed = 0, ablate_seed = 0;
    bool train_seed_set = false, ablate_seed_set = false;

    CLI::App* sub_gen_base = app.add_subcommand("gen-base", "Write a synthetic base image corpus");
    sub_gen_base->add_option("--out", gen_base.out, "Output directory")->required();
    sub_gen_base->add_option("--count", gen_base.count, "Number of images");
    sub_gen_base->add_option("--size", gen_base.size, "Square image size in pixels");
    sub_gen_base->add_option("--seed", gen_base.seed, "Generation seed");

    CLI::App* sub_gen_masks =
        app.add_subcommand("gen-masks", "Propose objects, segment them and build the manifest");
    sub_gen_masks->add_option("--images", gen_masks.images_dir, "Directory of .ppm images")
        ->required();
    sub_gen_masks->add_option("--out", gen_masks.out, "Dataset output directory")->required();
    sub_gen_masks->add_option("--seed", gen_masks.seed, "Segmentation seed");
    sub_gen_masks->add_option("--masks-per-image", gen_masks.masks_per_image,
                              "Maximum accepted masks per image");
    sub_gen_masks->add_option("--proposer", gen_masks.proposer, "stub or http");
    sub_gen_masks->add_option("--segmenter", gen_masks.segmenter, "stub or http");

    CLI::App* sub_gen_data =
        app.add_subcommand("gen-data", "Inpaint masked regions and extend the manifest");
    sub_gen_data->add_option("--manifest", gen_data.manifest_path, "Path to manifest.json")
        ->required();
    sub_gen_data
        ->add_option("--inpainters", gen_data.inpainters,
                     "Preset ids or http:<id> entries (comma separated)")
        ->delimiter(',');
    sub_gen_data->add_option("--p-random", gen_data.p_random,
                             "Probability of swapping in a random polygon mask");
    sub_gen_data->add_option("--seed", gen_data.seed, "Generation seed");

    CLI::App* sub_train = app.add_subcommand("train", "Train the fusion model");
    sub_train->add_option("--manifest", train.manifest_path, "Path to manifest.json")->required();
    sub_train->add_option("--out", train.out, "Run output directory")->required();
    sub_train->add_option("--config", train_config, "Training config JSON");
    sub_train->add_option("--seed", train_seed, "Seed override")
        ->each([&](const std::string&) { train_seed_set = true; });
    sub_train->add_option("--resume", train_resume, "Checkpoint to resume from");

    CLI::App* sub_infer = app.add_subcommand("infer", "Score a single image");
    sub_infer->add_option("--checkpoint", infer.checkpoint, "Trained checkpoint")->required();
    sub_infer->add_option("--image", infer.image_path, "Image to score (.ppm or .jpg)")
        ->required();
    sub_infer->add_option("--out", infer_map, "Probability map output (PGM)");
    sub_infer->add_option("--raw", infer_raw, "Raw double map output");

    CLI::App* sub_eval = app.add_subcommand("eval", "Evaluate a checkpoint over a dataset");
    sub_eval->add_option("--checkpoint", eval.checkpoint, "Trained checkpoint")->required();
    sub_eval->add_option("--manifest", eval.manifest_path, "Path to manifest.json")->required();
    sub_eval->add_option("--out", eval.out, "Report output directory")->required();
    sub_eval
        ->add_option("--perturb", eval.perturbations,
                     "none, jpeg:q, resize:s, blur:v or all (repeatable)")
        ->delimiter(',');

    CLI::App* sub_ablate = app.add_subcommand("ablate", "Train and evaluate ablation rows");
    sub_ablate->add_option("--manifest", ablate.manifest_path, "Path to manifest.json")
        ->required();
    sub_ablate->add_option("--out", ablate.out, "Output directory")->required();
    sub_ablate->add_option("--config", ablate_config, "Base training config JSON");
    sub_ablate
        ->add_option("--ablation-row", ablate.rows,
                     "key=value[,key=value...] overrides; repeat per row")
        ->take_all();
    sub_ablate->add_option("--seed", ablate_seed, "Seed override")
        ->each([&](const std::string&) { ablate_seed_set = true; });

    return run(app, argc, argv, [&]() -> CommandResult {
        if (!train_config.empty()) train.config_path = train_config;
        if (!train_resume.empty()) train.resume = train_resume;
        if (train_seed_set) train.seed = train_seed;
        if (!infer_map.empty()) infer.out_map = infer_map;
        if (!infer_raw.empty()) infer.out_raw = infer_raw;
        if (!ablate_config.empty()) ablate.config_path = ablate_config;
        if (ablate_seed_set) ablate.seed = ablate_seed;

        if (sub_gen_base->parsed()) return radar::cli::cmd_gen_base(gen_base);
        if (sub_gen_masks->parsed()) return radar::cli::cmd_gen_masks(gen_masks);
        if (sub_gen_data->parsed()) return radar::cli::cmd_gen_data(gen_data);
        if (sub_train->parsed()) return radar::cli::cmd_train(train);
        if (sub_infer->parsed()) return radar::cli::cmd_infer(infer);
        if (sub_eval->parsed()) return radar::cli::cmd_eval(eval);
        if (sub_ablate->parsed()) return radar::cli::cmd_ablate(ablate);
        throw std::invalid_argument("no subcommand selected");
    });
}
