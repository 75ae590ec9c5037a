#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "radar/contrastive.hpp"
#include "radar/datagen.hpp"
#include "radar/encoders.hpp"
#include "radar/fusion.hpp"
#include "radar/heads.hpp"
#include "radar/manifest.hpp"

namespace radar::training {

enum class MaskMode { Mixed, SemanticOnly, RandomOnly };
MaskMode mask_mode_from_string(const std::string& s);
std::string to_string(MaskMode mode);

struct AblationFlags {
    fusion::FusionMode fusion_mode = fusion::FusionMode::CrossAttention;
    contrastive::SclMode scl_mode = contrastive::SclMode::On;
    encoders::BackendKind encoder_mode = encoders::BackendKind::ToyTransformer;
    MaskMode mask_mode = MaskMode::Mixed;
    fusion::AttentionConvention attention_convention = fusion::AttentionConvention::AsWritten;

    bool operator==(const AblationFlags&) const = default;
};

struct TrainConfig {
    Index batch_size_groups = 16;
    Index epochs = 120;
    Scalar learning_rate = 1e-4;
    Scalar weight_decay = 1e-5;
    std::string optimizer_kind = "nadam";
    Scalar dropout_rate = 0.1;
    Index inpainters_per_group = 2;  // K
    std::uint64_t seed = 0;
    Index image_size = 224;
    Index patch_size = 16;
    Index feature_dim = 64;
    Index embed_dim = 32;
    Index mlp_hidden = 0;  // 0 selects 2 * feature_dim
    Index num_heads = 8;
    Scalar temperature = 1.0;
    bool l2_normalise = true;
    Index m_cap = 1024;
    Scalar scl_weight = 1.0;
    Scalar loc_weight = 1.0;
    Scalar val_fraction = 0.1;
    std::uint64_t encoder_seed = 7;
    std::string adapter_semantic_ref;
    std::string adapter_geometry_ref;
    AblationFlags ablation;

    bool operator==(const TrainConfig&) const = default;

    void validate() const;
    nlohmann::json to_json() const;
    static TrainConfig from_json(const nlohmann::json& j);
    static TrainConfig load(const std::filesystem::path& path);
};

// Trainable blocks plus the frozen encoder pair.
struct Model {
    std::shared_ptr<encoders::Encoder> enc_s, enc_g;
    fusion::FusionBlock fusion;
    contrastive::ProjectionHead projection;
    heads::LocalisationHead localisation;

    static Model build(const TrainConfig& config);

    void zero_grad();
    // Trainable parameters only (fusion, projection, localisation, in that
    // order); the frozen encoders are never visited.
    void visit_params(const nn::ParamVisitor& f);
    Index param_count();
    std::uint64_t encoder_checksum() const;

    // Dropout-free forward producing the tamper map at the requested size.
    heads::TamperMap infer(const Image& image, Index out_h, Index out_w) const;
};

class NadamOptimizer {
public:
    NadamOptimizer() = default;
    NadamOptimizer(Scalar lr, Scalar weight_decay);

    void step(Model& model);
    long steps_taken() const { return t_; }

    // Serialisation access (checkpointing).
    long t_ = 0;
    std::vector<Scalar> m_, v_;
    Scalar lr_ = 1e-4, weight_decay_ = 0;
    Scalar beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
};

// One training sample: an original image, its K tampered variants and the
// ground-truth mask. Pixel data is loaded lazily from the stored paths unless
// an in-memory group is attached.
struct TrainGroup {
    std::string key;  // stable identity for caching
    std::filesystem::path original_path;
    std::vector<std::filesystem::path> tampered_paths;
    Mask mask;  // at source resolution
    bool random_mask = false;
    std::shared_ptr<const datagen::SampleGroup> inline_group;  // overrides paths

    Index k() const {
        return inline_group ? inline_group->k() : static_cast<Index>(tampered_paths.size());
    }
};

// Expands a manifest into groups: one group per (entry, mask), taking K
// tampered images by rotating over the available inpainters so single-K runs
// still see every inpainter across the dataset. Groups whose mask provenance
// does not match the mask mode are dropped. Paths resolve against
// manifest_dir.
std::vector<TrainGroup> load_dataset(const manifest::DatasetManifest& m,
                                     const std::filesystem::path& manifest_dir, Index k,
                                     MaskMode mask_mode);

TrainGroup inline_train_group(const datagen::SampleGroup& group, std::string key,
                              bool random_mask = false);

struct StepLosses {
    Scalar total = 0, scl = 0, loc = 0;
};

struct EpochRow {
    Index epoch = 0;
    Scalar loss_total = 0, loss_scl = 0, loss_loc = 0;
    Scalar val_auc = 0, val_iou = 0;
};

inline constexpr const char* kMetricsCsvHeader =
    "epoch,loss_total,loss_scl,loss_loc,val_auc,val_iou";
void write_metrics_csv(const std::vector<EpochRow>& log, const std::filesystem::path& path);

// Frozen-encoder outputs and patch labels per group image (index 0 = the
// original image).
struct EncodedGroup {
    std::vector<FeatureSequence> semantic, geometry;
    std::vector<PatchLabels> labels;
    Mask target;  // loss target at encoder input resolution
};

class FeatureCache {
public:
    const EncodedGroup& get(const Model& model, const TrainGroup& tg);

private:
    std::map<std::string, EncodedGroup> cache_;
};

// One optimiser update over a batch of groups. Throws training-divergence on
// a non-finite loss or gradient; the update is skipped first.
StepLosses train_step(Model& model, NadamOptimizer& opt, const TrainConfig& config,
                      const std::vector<const TrainGroup*>& batch, FeatureCache& cache,
                      Rng& dropout_rng, Rng& sample_rng);

struct Checkpoint {
    TrainConfig config;
    Index epoch = 0;  // epochs completed
    std::vector<Scalar> params;
    long opt_t = 0;
    std::vector<Scalar> opt_m, opt_v;
    std::uint64_t encoder_checksum = 0;
    Scalar recorded_val_loss = 0;
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Rebuilds the model from the stored config and parameters and verifies the
// frozen-encoder checksum recorded at save time.
Model model_from_checkpoint(const Checkpoint& ckpt);
Checkpoint make_checkpoint(Model& model, const NadamOptimizer& opt, const TrainConfig& config,
                           Index epoch, Scalar val_loss);

// Deterministic held-out split: indices of validation groups.
std::vector<Index> validation_indices(Index group_count, const TrainConfig& config);
// Groups over which the checkpointed loss is computed: the validation split,
// or the leading groups when no split exists.
std::vector<Index> checkpoint_loss_indices(Index group_count, const TrainConfig& config);

// Dropout-free loss over the given groups; the value recorded in checkpoints.
Scalar evaluation_loss(const Model& model, const std::vector<TrainGroup>& dataset,
                       const std::vector<Index>& indices, const TrainConfig& config);

struct TrainOutput {
    Model model;
    NadamOptimizer optimizer;
    std::vector<EpochRow> log;
    std::vector<Index> val_indices;
    Scalar final_val_loss = 0;
};

TrainOutput train(const TrainConfig& config, const std::vector<TrainGroup>& dataset,
                  const std::optional<Checkpoint>& resume = std::nullopt);

}  // namespace radar::training
