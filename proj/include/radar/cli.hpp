#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "radar/types.hpp"

namespace radar::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitExternal = 3;
inline constexpr int kExitDivergence = 4;

struct CommandResult {
    int exit_code = kExitOk;
    std::vector<std::string> artifacts;
    std::string summary;
};

// Synthetic base-image corpus.
struct GenBaseOptions {
    std::filesystem::path out;
    Index count = 8;
    Index size = 224;
    std::uint64_t seed = 0;
};
CommandResult cmd_gen_base(const GenBaseOptions& opt);

// Object proposals + segmentation masks + manifest skeleton.
struct GenMasksOptions {
    std::filesystem::path images_dir;
    std::filesystem::path out;
    std::uint64_t seed = 0;
    Index masks_per_image = 1;
    std::string proposer = "stub";   // stub | http
    std::string segmenter = "stub";  // stub | http
};
CommandResult cmd_gen_masks(const GenMasksOptions& opt);

// Tampered images via pseudo-inpainters (or an HTTP inpainter), with the
// occasional random-polygon mask substitution recorded in the manifest.
struct GenDataOptions {
    std::filesystem::path manifest_path;
    std::vector<std::string> inpainters = {"pi-soft", "pi-noisy"};
    Scalar p_random = 0.3;
    std::uint64_t seed = 0;
};
CommandResult cmd_gen_data(const GenDataOptions& opt);

struct TrainOptions {
    std::filesystem::path manifest_path;
    std::filesystem::path out;
    std::optional<std::filesystem::path> config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> resume;
};
CommandResult cmd_train(const TrainOptions& opt);

struct InferOptions {
    std::filesystem::path checkpoint;
    std::filesystem::path image_path;
    std::optional<std::filesystem::path> out_map;  // PGM probability map
    std::optional<std::filesystem::path> out_raw;  // raw double export
};
CommandResult cmd_infer(const InferOptions& opt);

struct EvalOptions {
    std::filesystem::path checkpoint;
    std::filesystem::path manifest_path;
    std::filesystem::path out;
    std::vector<std::string> perturbations = {"none"};  // tokens or "all"
};
CommandResult cmd_eval(const EvalOptions& opt);

struct AblateOptions {
    std::filesystem::path manifest_path;
    std::filesystem::path out;
    std::optional<std::filesystem::path> config_path;
    std::vector<std::string> rows;  // "key=value[,key=value...]" per row
    std::optional<std::uint64_t> seed;
};
CommandResult cmd_ablate(const AblateOptions& opt);

// Maps the active exception onto a process exit code; call inside a handler.
int exit_code_for_current_exception();

}  // namespace radar::cli
