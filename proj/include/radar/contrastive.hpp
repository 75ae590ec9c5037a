#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "radar/nn.hpp"
#include "radar/patch_grid.hpp"

namespace radar::contrastive {

enum class SclMode { On, Off, NoAffected, AffectedAsOrig };

SclMode scl_mode_from_string(const std::string& s);
std::string to_string(SclMode mode);

struct ProjectionParams {
    Index input_dim = 64;
    Index hidden = 0;  // 0 selects input_dim
    Index embed_dim = 32;
    bool l2_normalise = true;

    Index hidden_width() const { return hidden > 0 ? hidden : input_dim; }
};

// Patchwise MLP mapping fused features into the contrastive embedding space,
// optionally followed by row-wise L2 normalisation.
struct ProjectionHead {
    ProjectionParams params;
    nn::Mlp mlp;

    ProjectionHead() = default;
    ProjectionHead(const ProjectionParams& p, std::uint64_t seed);

    struct Cache {
        nn::Mlp::Cache mlp;
        Matrix z;         // final output
        Vector inv_norm;  // only filled when normalising
    };

    Matrix forward(const Matrix& x, Cache* cache = nullptr,
                   const nn::DropoutCtx& dropout = {}) const;
    Matrix backward(Cache& cache, const Matrix& dz);
    void zero_grad();
    void visit_params(const nn::ParamVisitor& f);
};

struct EmbeddingSource {
    Index group = 0;
    Index image = 0;  // 0 = original, k >= 1 = k-th tampered
    Index patch = 0;
};

struct LabeledEmbeddings {
    Matrix embeddings;  // M x d_z
    std::vector<PatchClass> labels;
    std::vector<EmbeddingSource> sources;

    Index size() const { return embeddings.rows(); }
    std::vector<int> label_ids() const;
    void append(const Matrix& z, const std::vector<PatchClass>& patch_labels, Index group,
                Index image);
};

// Applies the class transform for the configured mode (drop AFFECTED rows or
// fold them into ORIGINAL), then subsamples each class down to at most m_cap
// rows (uniform without replacement; m_cap <= 0 disables the cap).
LabeledEmbeddings assemble_embeddings(const LabeledEmbeddings& all, SclMode mode, Index m_cap,
                                      Rng& rng);

// Supervised contrastive loss: sum over anchors i of the mean over same-label
// positives j of -log softmax_{k != i}(z_i . z_k / tau) evaluated at j.
// Anchors without positives contribute zero. Throws invalid-argument for
// fewer than two rows or non-positive tau.
Scalar supcon_loss(const Matrix& z, const std::vector<int>& labels, Scalar tau);

// Same value; also accumulates dL/dz into dz (resized and zeroed first).
Scalar supcon_loss_backward(const Matrix& z, const std::vector<int>& labels, Scalar tau,
                            Matrix& dz);

}  // namespace radar::contrastive
