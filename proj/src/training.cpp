#include "radar/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <stdexcept>

#include "radar/errors.hpp"
#include "radar/evaluation.hpp"
#include "radar/image.hpp"
#include "radar/rng.hpp"

namespace radar::training {

namespace {

constexpr const char* kCheckpointFormat = "radar-checkpoint-v1";

void require(bool ok, const std::string& message) {
    if (!ok) throw ConfigurationError(message);
}

void check_known_keys(const nlohmann::json& j, const std::set<std::string>& known,
                      const std::string& scope) {
    for (const auto& item : j.items())
        if (!known.contains(item.key()))
            throw ConfigurationError("unknown " + scope + " key: " + item.key());
}

std::string fmt(Scalar v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.8g", v);
    return buf;
}

}  // namespace

MaskMode mask_mode_from_string(const std::string& s) {
    if (s == "mixed") return MaskMode::Mixed;
    if (s == "semantic-only") return MaskMode::SemanticOnly;
    if (s == "random-only") return MaskMode::RandomOnly;
    throw std::invalid_argument("unknown mask mode: " + s);
}

std::string to_string(MaskMode mode) {
    switch (mode) {
        case MaskMode::Mixed: return "mixed";
        case MaskMode::SemanticOnly: return "semantic-only";
        case MaskMode::RandomOnly: return "random-only";
    }
    return "mixed";
}

void TrainConfig::validate() const {
    require(batch_size_groups >= 1, "batch_size_groups must be at least 1");
    require(epochs >= 1, "epochs must be at least 1");
    require(learning_rate > 0, "learning_rate must be positive");
    require(weight_decay >= 0, "weight_decay must be non-negative");
    require(optimizer_kind == "nadam", "unsupported optimizer: " + optimizer_kind);
    require(dropout_rate >= 0 && dropout_rate < 1, "dropout_rate must lie in [0, 1)");
    require(inpainters_per_group >= 1, "inpainters_per_group must be at least 1");
    require(image_size > 0, "image_size must be positive");
    require(patch_size > 0, "patch_size must be positive");
    require(feature_dim > 0, "feature_dim must be positive");
    require(embed_dim > 0, "embed_dim must be positive");
    require(num_heads >= 1, "num_heads must be at least 1");
    require(temperature > 0, "temperature must be positive");
    require(scl_weight >= 0 && loc_weight >= 0, "loss weights must be non-negative");
    require(val_fraction >= 0 && val_fraction < 1, "val_fraction must lie in [0, 1)");
    fusion::FusionParams fp{feature_dim, num_heads, mlp_hidden, dropout_rate,
                            ablation.fusion_mode, ablation.attention_convention};
    fp.validate();
}

nlohmann::json TrainConfig::to_json() const {
    nlohmann::json j;
    j["batch_size_groups"] = batch_size_groups;
    j["epochs"] = epochs;
    j["learning_rate"] = learning_rate;
    j["weight_decay"] = weight_decay;
    j["optimizer"] = optimizer_kind;
    j["dropout_rate"] = dropout_rate;
    j["inpainters_per_group"] = inpainters_per_group;
    j["seed"] = seed;
    j["image_size"] = image_size;
    j["patch_size"] = patch_size;
    j["feature_dim"] = feature_dim;
    j["embed_dim"] = embed_dim;
    j["mlp_hidden"] = mlp_hidden;
    j["num_heads"] = num_heads;
    j["temperature"] = temperature;
    j["l2_normalise"] = l2_normalise;
    j["m_cap"] = m_cap;
    j["scl_weight"] = scl_weight;
    j["loc_weight"] = loc_weight;
    j["val_fraction"] = val_fraction;
    j["encoder_seed"] = encoder_seed;
    j["adapter_semantic_ref"] = adapter_semantic_ref;
    j["adapter_geometry_ref"] = adapter_geometry_ref;
    j["ablation"] = {{"fusion_mode", fusion::to_string(ablation.fusion_mode)},
                     {"scl_mode", contrastive::to_string(ablation.scl_mode)},
                     {"encoder_mode", encoders::to_string(ablation.encoder_mode)},
                     {"mask_mode", to_string(ablation.mask_mode)},
                     {"attention_convention", fusion::to_string(ablation.attention_convention)}};
    return j;
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
    static const std::set<std::string> known = {
        "batch_size_groups", "epochs", "learning_rate", "weight_decay", "optimizer",
        "dropout_rate", "inpainters_per_group", "seed", "image_size", "patch_size",
        "feature_dim", "embed_dim", "mlp_hidden", "num_heads", "temperature", "l2_normalise",
        "m_cap", "scl_weight", "loc_weight", "val_fraction", "encoder_seed",
        "adapter_semantic_ref", "adapter_geometry_ref", "ablation"};
    static const std::set<std::string> known_ablation = {
        "fusion_mode", "scl_mode", "encoder_mode", "mask_mode", "attention_convention"};
    if (!j.is_object()) throw ConfigurationError("training config must be a JSON object");
    check_known_keys(j, known, "config");

    TrainConfig c;
    try {
        c.batch_size_groups = j.value("batch_size_groups", c.batch_size_groups);
        c.epochs = j.value("epochs", c.epochs);
        c.learning_rate = j.value("learning_rate", c.learning_rate);
        c.weight_decay = j.value("weight_decay", c.weight_decay);
        c.optimizer_kind = j.value("optimizer", c.optimizer_kind);
        c.dropout_rate = j.value("dropout_rate", c.dropout_rate);
        c.inpainters_per_group = j.value("inpainters_per_group", c.inpainters_per_group);
        c.seed = j.value("seed", c.seed);
        c.image_size = j.value("image_size", c.image_size);
        c.patch_size = j.value("patch_size", c.patch_size);
        c.feature_dim = j.value("feature_dim", c.feature_dim);
        c.embed_dim = j.value("embed_dim", c.embed_dim);
        c.mlp_hidden = j.value("mlp_hidden", c.mlp_hidden);
        c.num_heads = j.value("num_heads", c.num_heads);
        c.temperature = j.value("temperature", c.temperature);
        c.l2_normalise = j.value("l2_normalise", c.l2_normalise);
        c.m_cap = j.value("m_cap", c.m_cap);
        c.scl_weight = j.value("scl_weight", c.scl_weight);
        c.loc_weight = j.value("loc_weight", c.loc_weight);
        c.val_fraction = j.value("val_fraction", c.val_fraction);
        c.encoder_seed = j.value("encoder_seed", c.encoder_seed);
        c.adapter_semantic_ref = j.value("adapter_semantic_ref", c.adapter_semantic_ref);
        c.adapter_geometry_ref = j.value("adapter_geometry_ref", c.adapter_geometry_ref);
        if (j.contains("ablation")) {
            const auto& a = j.at("ablation");
            if (!a.is_object()) throw ConfigurationError("ablation must be a JSON object");
            check_known_keys(a, known_ablation, "ablation");
            if (a.contains("fusion_mode"))
                c.ablation.fusion_mode = fusion::fusion_mode_from_string(a.at("fusion_mode"));
            if (a.contains("scl_mode"))
                c.ablation.scl_mode = contrastive::scl_mode_from_string(a.at("scl_mode"));
            if (a.contains("encoder_mode"))
                c.ablation.encoder_mode = encoders::backend_kind_from_string(a.at("encoder_mode"));
            if (a.contains("mask_mode"))
                c.ablation.mask_mode = mask_mode_from_string(a.at("mask_mode"));
            if (a.contains("attention_convention"))
                c.ablation.attention_convention =
                    fusion::convention_from_string(a.at("attention_convention"));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigurationError(std::string("bad training config value: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigurationError(std::string("bad training config value: ") + e.what());
    }
    c.validate();
    return c;
}

TrainConfig TrainConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigurationError("cannot open config file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("invalid JSON in " + path.string() + ": " + e.what());
    }
    return from_json(j);
}

Model Model::build(const TrainConfig& c) {
    c.validate();
    encoders::EncoderBackendSpec ss;
    ss.kind = c.ablation.encoder_mode;
    ss.modality = Modality::Semantic;
    ss.patch_size = c.patch_size;
    ss.feature_dim = c.feature_dim;
    ss.input_size = c.image_size;
    ss.seed = c.encoder_seed;
    ss.weights_ref = c.adapter_semantic_ref;
    encoders::EncoderBackendSpec gs = ss;
    gs.modality = Modality::Geometry;
    gs.weights_ref = c.adapter_geometry_ref;

    fusion::FusionParams fp{c.feature_dim, c.num_heads, c.mlp_hidden, c.dropout_rate,
                            c.ablation.fusion_mode, c.ablation.attention_convention};
    contrastive::ProjectionParams pp{c.feature_dim, 0, c.embed_dim, c.l2_normalise};

    Model m;
    m.enc_s = std::make_shared<encoders::Encoder>(ss);
    m.enc_g = std::make_shared<encoders::Encoder>(gs);
    m.fusion = fusion::FusionBlock(fp, mix_seed(c.seed, "fusion-init"));
    m.projection = contrastive::ProjectionHead(pp, mix_seed(c.seed, "projection-init"));
    m.localisation = heads::LocalisationHead(c.feature_dim, mix_seed(c.seed, "localisation-init"));
    return m;
}

void Model::zero_grad() {
    fusion.zero_grad();
    projection.zero_grad();
    localisation.zero_grad();
}

void Model::visit_params(const nn::ParamVisitor& f) {
    fusion.visit_params(f);
    projection.visit_params(f);
    localisation.visit_params(f);
}

Index Model::param_count() {
    Index n = 0;
    visit_params([&](Scalar*, Scalar*, Index c) { n += c; });
    return n;
}

std::uint64_t Model::encoder_checksum() const {
    return encoders::pair_checksum(*enc_s, *enc_g);
}

heads::TamperMap Model::infer(const Image& image, Index out_h, Index out_w) const {
    FeatureSequence sem = enc_s->encode(image);
    FeatureSequence geo = enc_g->encode(image);
    FeatureSequence fused = fusion.fuse(sem, geo);
    return localisation.forward(fused, out_h, out_w);
}

NadamOptimizer::NadamOptimizer(Scalar lr, Scalar weight_decay)
    : lr_(lr), weight_decay_(weight_decay) {}

void NadamOptimizer::step(Model& model) {
    if (m_.empty()) {
        const Index n = model.param_count();
        m_.assign(static_cast<std::size_t>(n), 0);
        v_.assign(static_cast<std::size_t>(n), 0);
    }
    ++t_;
    const Scalar b1t = std::pow(beta1_, static_cast<Scalar>(t_));
    const Scalar b1t1 = std::pow(beta1_, static_cast<Scalar>(t_ + 1));
    const Scalar b2t = std::pow(beta2_, static_cast<Scalar>(t_));
    std::size_t off = 0;
    model.visit_params([&](Scalar* p, Scalar* g, Index n) {
        for (Index i = 0; i < n; ++i) {
            const Scalar grad = g[i] + weight_decay_ * p[i];
            Scalar& m = m_[off + static_cast<std::size_t>(i)];
            Scalar& v = v_[off + static_cast<std::size_t>(i)];
            m = beta1_ * m + (1 - beta1_) * grad;
            v = beta2_ * v + (1 - beta2_) * grad * grad;
            const Scalar m_bar = beta1_ * m / (1 - b1t1) + (1 - beta1_) * grad / (1 - b1t);
            const Scalar v_hat = v / (1 - b2t);
            p[i] -= lr_ * m_bar / (std::sqrt(v_hat) + eps_);
        }
        off += static_cast<std::size_t>(n);
    });
}

std::vector<TrainGroup> load_dataset(const manifest::DatasetManifest& m,
                                     const std::filesystem::path& manifest_dir, Index k,
                                     MaskMode mask_mode) {
    if (k < 1) throw std::invalid_argument("inpainters per group must be at least 1");
    std::vector<TrainGroup> out;
    for (const auto& entry : m.entries) {
        for (const auto& mr : entry.mask_records) {
            const bool random = mr.masked_object == "random-polygon";
            if (mask_mode == MaskMode::SemanticOnly && random) continue;
            if (mask_mode == MaskMode::RandomOnly && !random) continue;

            std::vector<const manifest::TamperedRecord*> recs;
            for (const auto& t : entry.tampered)
                if (t.mask_number == mr.mask_number) recs.push_back(&t);
            if (recs.empty()) continue;  // mask present but never inpainted
            if (static_cast<Index>(recs.size()) < k)
                throw ValidationError("entry " + entry.image_path + " mask " +
                                      std::to_string(mr.mask_number) + " has " +
                                      std::to_string(recs.size()) +
                                      " tampered images, fewer than the requested " +
                                      std::to_string(k));

            TrainGroup tg;
            tg.key = entry.image_path + "#" + std::to_string(mr.mask_number);
            tg.original_path = manifest_dir / entry.image_path;
            const Index rot = static_cast<Index>(out.size());
            for (Index j = 0; j < k; ++j)
                tg.tampered_paths.push_back(
                    manifest_dir / recs[static_cast<std::size_t>((rot + j) %
                                                                 static_cast<Index>(recs.size()))]
                                       ->path);
            const std::string& mask_rel =
                mr.edited_mask_path.empty() ? mr.original_mask_path : mr.edited_mask_path;
            tg.mask = read_mask_pgm(manifest_dir / mask_rel);
            tg.random_mask = random;
            out.push_back(std::move(tg));
        }
    }
    return out;
}

TrainGroup inline_train_group(const datagen::SampleGroup& group, std::string key,
                              bool random_mask) {
    group.validate();
    TrainGroup tg;
    tg.key = std::move(key);
    tg.mask = group.mask;
    tg.random_mask = random_mask;
    tg.inline_group = std::make_shared<datagen::SampleGroup>(group);
    return tg;
}

void write_metrics_csv(const std::vector<EpochRow>& log, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw GenerationError("cannot write metrics csv: " + path.string());
    out << kMetricsCsvHeader << "\n";
    for (const auto& r : log)
        out << r.epoch << "," << fmt(r.loss_total) << "," << fmt(r.loss_scl) << ","
            << fmt(r.loss_loc) << "," << fmt(r.val_auc) << "," << fmt(r.val_iou) << "\n";
}

const EncodedGroup& FeatureCache::get(const Model& model, const TrainGroup& tg) {
    auto it = cache_.find(tg.key);
    if (it != cache_.end()) return it->second;

    EncodedGroup e;
    auto encode_one = [&](const Image& img) {
        e.semantic.push_back(model.enc_s->encode(img));
        e.geometry.push_back(model.enc_g->encode(img));
    };
    if (tg.inline_group) {
        encode_one(tg.inline_group->original_image);
        for (const Image& t : tg.inline_group->tampered_images) encode_one(t);
    } else {
        encode_one(read_ppm(tg.original_path));
        for (const auto& p : tg.tampered_paths) encode_one(read_ppm(p));
    }
    const PatchGrid& grid = e.semantic.front().grid;
    e.target = resize_nearest(tg.mask, grid.image_height, grid.image_width);
    e.labels.push_back(classify_patches(grid, e.target, false));
    for (std::size_t i = 1; i < e.semantic.size(); ++i)
        e.labels.push_back(classify_patches(grid, e.target, true));
    return cache_.emplace(tg.key, std::move(e)).first->second;
}

namespace {

struct ImageForward {
    fusion::FusionBlock::Cache fusion;
    contrastive::ProjectionHead::Cache proj;
    heads::LocalisationHead::Cache loc;
    Plane dmap;
    Matrix dz;
};

bool grads_finite(Model& model) {
    bool ok = true;
    model.visit_params([&](Scalar*, Scalar* g, Index n) {
        for (Index i = 0; i < n; ++i)
            if (!std::isfinite(g[i])) ok = false;
    });
    return ok;
}

}  // namespace

StepLosses train_step(Model& model, NadamOptimizer& opt, const TrainConfig& config,
                      const std::vector<const TrainGroup*>& batch, FeatureCache& cache,
                      Rng& dropout_rng, Rng& sample_rng) {
    if (batch.empty()) throw std::invalid_argument("empty training batch");
    model.zero_grad();
    const nn::DropoutCtx drop{config.dropout_rate, &dropout_rng};

    std::vector<ImageForward> fwds;
    std::vector<std::vector<std::size_t>> fwd_of(batch.size());
    contrastive::LabeledEmbeddings all;
    Scalar loc_raw = 0;

    for (std::size_t gi = 0; gi < batch.size(); ++gi) {
        const EncodedGroup& e = cache.get(model, *batch[gi]);
        const Mask zero = Mask::Zero(e.target.rows(), e.target.cols());
        for (std::size_t ii = 0; ii < e.semantic.size(); ++ii) {
            ImageForward f;
            const FeatureSequence fused =
                model.fusion.fuse(e.semantic[ii], e.geometry[ii], &f.fusion, drop);
            const Matrix z = model.projection.forward(fused.features, &f.proj, drop);
            all.append(z, e.labels[ii].labels, static_cast<Index>(gi), static_cast<Index>(ii));
            const heads::TamperMap map =
                model.localisation.forward(fused, e.target.rows(), e.target.cols(), &f.loc);
            loc_raw += heads::loc_loss_backward(map, ii == 0 ? zero : e.target, f.dmap);
            f.dz = Matrix::Zero(z.rows(), z.cols());
            fwd_of[gi].push_back(fwds.size());
            fwds.push_back(std::move(f));
        }
    }

    Scalar scl_raw = 0;
    if (config.ablation.scl_mode != contrastive::SclMode::Off && config.scl_weight > 0) {
        const contrastive::LabeledEmbeddings sel = contrastive::assemble_embeddings(
            all, config.ablation.scl_mode, config.m_cap, sample_rng);
        if (sel.size() >= 2) {
            Matrix dz_sel;
            scl_raw = contrastive::supcon_loss_backward(sel.embeddings, sel.label_ids(),
                                                        config.temperature, dz_sel);
            for (Index r = 0; r < sel.size(); ++r) {
                const auto& s = sel.sources[static_cast<std::size_t>(r)];
                ImageForward& f =
                    fwds[fwd_of[static_cast<std::size_t>(s.group)][static_cast<std::size_t>(
                        s.image)]];
                f.dz.row(s.patch) += dz_sel.row(r);
            }
        }
    }

    StepLosses losses;
    losses.scl = config.scl_weight * scl_raw;
    losses.loc = config.loc_weight * loc_raw;
    losses.total = losses.scl + losses.loc;
    if (!std::isfinite(losses.total))
        throw TrainingDivergence("non-finite loss " + fmt(losses.total) +
                                 "; optimiser step rejected");

    for (ImageForward& f : fwds) {
        Matrix dfeat = model.localisation.backward(f.loc, Plane(config.loc_weight * f.dmap));
        dfeat += model.projection.backward(f.proj, Matrix(config.scl_weight * f.dz));
        model.fusion.backward(f.fusion, dfeat, nullptr, nullptr);
        f = ImageForward{};  // release cache memory early
    }

    if (!grads_finite(model))
        throw TrainingDivergence("non-finite gradient; optimiser step rejected");
    opt.step(model);
    return losses;
}

std::vector<Index> validation_indices(Index group_count, const TrainConfig& config) {
    const Index n_val = static_cast<Index>(
        std::ceil(static_cast<Scalar>(group_count) * config.val_fraction));
    std::vector<Index> order(static_cast<std::size_t>(group_count));
    std::iota(order.begin(), order.end(), Index{0});
    Rng rng = make_rng(config.seed, "val-split");
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<Index> val(order.begin(), order.begin() + std::min(n_val, group_count));
    std::sort(val.begin(), val.end());
    return val;
}

std::vector<Index> checkpoint_loss_indices(Index group_count, const TrainConfig& config) {
    std::vector<Index> idx = validation_indices(group_count, config);
    if (idx.empty()) {
        const Index n = std::min(group_count, config.batch_size_groups);
        idx.resize(static_cast<std::size_t>(n));
        std::iota(idx.begin(), idx.end(), Index{0});
    }
    return idx;
}

Scalar evaluation_loss(const Model& model, const std::vector<TrainGroup>& dataset,
                       const std::vector<Index>& indices, const TrainConfig& config) {
    if (indices.empty()) return 0;
    FeatureCache cache;
    Scalar total = 0;
    for (Index idx : indices) {
        const EncodedGroup& e = cache.get(model, dataset.at(static_cast<std::size_t>(idx)));
        const Mask zero = Mask::Zero(e.target.rows(), e.target.cols());
        contrastive::LabeledEmbeddings all;
        Scalar loc_raw = 0;
        for (std::size_t ii = 0; ii < e.semantic.size(); ++ii) {
            const FeatureSequence fused = model.fusion.fuse(e.semantic[ii], e.geometry[ii]);
            const Matrix z = model.projection.forward(fused.features);
            all.append(z, e.labels[ii].labels, 0, static_cast<Index>(ii));
            const heads::TamperMap map =
                model.localisation.forward(fused, e.target.rows(), e.target.cols());
            loc_raw += heads::loc_loss(map, ii == 0 ? zero : e.target);
        }
        Scalar scl_raw = 0;
        if (config.ablation.scl_mode != contrastive::SclMode::Off && config.scl_weight > 0) {
            Rng rng = make_rng(config.seed, "val-loss", static_cast<std::uint64_t>(idx));
            const contrastive::LabeledEmbeddings sel = contrastive::assemble_embeddings(
                all, config.ablation.scl_mode, config.m_cap, rng);
            if (sel.size() >= 2)
                scl_raw = contrastive::supcon_loss(sel.embeddings, sel.label_ids(),
                                                   config.temperature);
        }
        total += config.scl_weight * scl_raw + config.loc_weight * loc_raw;
    }
    return total / static_cast<Scalar>(indices.size());
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    nlohmann::json j;
    j["format"] = kCheckpointFormat;
    j["config"] = ckpt.config.to_json();
    j["epoch"] = ckpt.epoch;
    j["params"] = ckpt.params;
    j["optimizer"] = {{"t", ckpt.opt_t}, {"m", ckpt.opt_m}, {"v", ckpt.opt_v}};
    j["encoder_checksum"] = ckpt.encoder_checksum;
    j["recorded_val_loss"] = ckpt.recorded_val_loss;
    const std::vector<std::uint8_t> bytes = nlohmann::json::to_cbor(j);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw GenerationError("cannot write checkpoint: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFoundError("checkpoint not found: " + path.string());
    const std::string bytes((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
    nlohmann::json j;
    try {
        j = nlohmann::json::from_cbor(bytes);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("malformed checkpoint " + path.string() + ": " + e.what());
    }
    Checkpoint c;
    try {
        if (j.at("format") != kCheckpointFormat)
            throw ParseError("unsupported checkpoint format in " + path.string());
        c.config = TrainConfig::from_json(j.at("config"));
        c.epoch = j.at("epoch");
        c.params = j.at("params").get<std::vector<Scalar>>();
        c.opt_t = j.at("optimizer").at("t");
        c.opt_m = j.at("optimizer").at("m").get<std::vector<Scalar>>();
        c.opt_v = j.at("optimizer").at("v").get<std::vector<Scalar>>();
        c.encoder_checksum = j.at("encoder_checksum");
        c.recorded_val_loss = j.at("recorded_val_loss");
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("malformed checkpoint " + path.string() + ": " + e.what());
    }
    return c;
}

Model model_from_checkpoint(const Checkpoint& ckpt) {
    Model model = Model::build(ckpt.config);
    if (model.param_count() != static_cast<Index>(ckpt.params.size()))
        throw ParseError("checkpoint parameter count mismatch");
    std::size_t off = 0;
    model.visit_params([&](Scalar* p, Scalar*, Index n) {
        std::copy_n(ckpt.params.begin() + static_cast<std::ptrdiff_t>(off),
                    static_cast<std::size_t>(n), p);
        off += static_cast<std::size_t>(n);
    });
    if (model.encoder_checksum() != ckpt.encoder_checksum)
        throw ConfigurationError(
            "frozen encoder checksum does not match the checkpointed value");
    return model;
}

Checkpoint make_checkpoint(Model& model, const NadamOptimizer& opt, const TrainConfig& config,
                           Index epoch, Scalar val_loss) {
    Checkpoint c;
    c.config = config;
    c.epoch = epoch;
    c.params.reserve(static_cast<std::size_t>(model.param_count()));
    model.visit_params([&](Scalar* p, Scalar*, Index n) {
        c.params.insert(c.params.end(), p, p + n);
    });
    c.opt_t = opt.t_;
    c.opt_m = opt.m_;
    c.opt_v = opt.v_;
    c.encoder_checksum = model.encoder_checksum();
    c.recorded_val_loss = val_loss;
    return c;
}

TrainOutput train(const TrainConfig& config, const std::vector<TrainGroup>& dataset,
                  const std::optional<Checkpoint>& resume) {
    config.validate();
    if (dataset.empty()) throw std::invalid_argument("training dataset is empty");

    TrainOutput out;
    out.model = Model::build(config);
    out.optimizer = NadamOptimizer(config.learning_rate, config.weight_decay);
    Index start_epoch = 0;
    if (resume) {
        if (out.model.param_count() != static_cast<Index>(resume->params.size()))
            throw ConfigurationError("resume checkpoint does not match the model shape");
        std::size_t off = 0;
        out.model.visit_params([&](Scalar* p, Scalar*, Index n) {
            std::copy_n(resume->params.begin() + static_cast<std::ptrdiff_t>(off),
                        static_cast<std::size_t>(n), p);
            off += static_cast<std::size_t>(n);
        });
        out.optimizer.t_ = resume->opt_t;
        out.optimizer.m_ = resume->opt_m;
        out.optimizer.v_ = resume->opt_v;
        start_epoch = resume->epoch;
    }

    const std::uint64_t frozen = out.model.encoder_checksum();
    const Index n = static_cast<Index>(dataset.size());
    out.val_indices = validation_indices(n, config);
    std::vector<char> is_val(dataset.size(), 0);
    for (Index idx : out.val_indices) is_val[static_cast<std::size_t>(idx)] = 1;
    std::vector<Index> train_idx;
    for (Index i = 0; i < n; ++i)
        if (!is_val[static_cast<std::size_t>(i)]) train_idx.push_back(i);
    if (train_idx.empty())
        throw std::invalid_argument("validation split leaves no training groups");

    FeatureCache cache;
    for (Index epoch = start_epoch; epoch < config.epochs; ++epoch) {
        std::vector<Index> order = train_idx;
        Rng shuffle_rng = make_rng(config.seed, "shuffle", static_cast<std::uint64_t>(epoch));
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        Rng dropout_rng = make_rng(config.seed, "dropout", static_cast<std::uint64_t>(epoch));
        Rng sample_rng = make_rng(config.seed, "scl-sample", static_cast<std::uint64_t>(epoch));

        Scalar scl_sum = 0, loc_sum = 0;
        Index steps = 0;
        for (std::size_t pos = 0; pos < order.size();
             pos += static_cast<std::size_t>(config.batch_size_groups)) {
            std::vector<const TrainGroup*> batch;
            for (std::size_t i = pos;
                 i < std::min(order.size(), pos + static_cast<std::size_t>(config.batch_size_groups));
                 ++i)
                batch.push_back(&dataset[static_cast<std::size_t>(order[i])]);
            const StepLosses sl =
                train_step(out.model, out.optimizer, config, batch, cache, dropout_rng, sample_rng);
            scl_sum += sl.scl;
            loc_sum += sl.loc;
            ++steps;
        }
        if (out.model.encoder_checksum() != frozen)
            throw std::logic_error("frozen encoder parameters changed during training");

        EpochRow row;
        row.epoch = epoch + 1;
        row.loss_scl = scl_sum / static_cast<Scalar>(steps);
        row.loss_loc = loc_sum / static_cast<Scalar>(steps);
        row.loss_total = row.loss_scl + row.loss_loc;

        if (!out.val_indices.empty()) {
            std::vector<Scalar> scores;
            std::vector<int> labels;
            std::vector<Scalar> ious;
            for (Index idx : out.val_indices) {
                const EncodedGroup& e = cache.get(out.model, dataset[static_cast<std::size_t>(idx)]);
                for (std::size_t ii = 0; ii < e.semantic.size(); ++ii) {
                    const FeatureSequence fused =
                        out.model.fusion.fuse(e.semantic[ii], e.geometry[ii]);
                    const heads::TamperMap map = out.model.localisation.forward(
                        fused, e.target.rows(), e.target.cols());
                    scores.push_back(heads::detection_score(map));
                    labels.push_back(ii == 0 ? 0 : 1);
                    if (ii > 0)
                        ious.push_back(evaluation::f1_iou(map.probabilities, e.target).iou);
                }
            }
            row.val_auc = evaluation::roc_auc(scores, labels);
            row.val_iou = ious.empty()
                              ? 0
                              : std::accumulate(ious.begin(), ious.end(), Scalar{0}) /
                                    static_cast<Scalar>(ious.size());
        }
        out.log.push_back(row);
    }

    out.final_val_loss =
        evaluation_loss(out.model, dataset, checkpoint_loss_indices(n, config), config);
    return out;
}

}  // namespace radar::training
