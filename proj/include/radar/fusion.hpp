#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "radar/feature_sequence.hpp"
#include "radar/nn.hpp"

namespace radar::fusion {

enum class FusionMode { CrossAttention, Concat, Sum, SemanticOnly, GeometryOnly };

// Pairing of the attention inputs when computing F_{S<-G}: AsWritten takes
// keys from the target modality and queries/values from the source; QFromSelf
// takes queries from the target and keys/values from the source.
enum class AttentionConvention { AsWritten, QFromSelf };

FusionMode fusion_mode_from_string(const std::string& s);
std::string to_string(FusionMode mode);
AttentionConvention convention_from_string(const std::string& s);
std::string to_string(AttentionConvention c);

struct FusionParams {
    Index feature_dim = 64;
    Index num_heads = 8;
    Index mlp_hidden = 0;  // 0 selects 2 * feature_dim
    Scalar dropout_rate = 0.1;
    FusionMode mode = FusionMode::CrossAttention;
    AttentionConvention convention = AttentionConvention::AsWritten;

    Index hidden() const { return mlp_hidden > 0 ? mlp_hidden : 2 * feature_dim; }
    Index mlp_input_dim() const;
    void validate() const;
};

// Fuses the semantic and geometry patch sequences into one sequence of the
// same width. In cross-attention mode both inputs are layer-normalised,
// attended in both directions, added back residually, concatenated and mixed
// by a patchwise MLP with a closing layer-norm. The other modes skip the
// attention stage and feed the combined (or single) raw sequence to the MLP.
struct FusionBlock {
    FusionParams params;
    nn::LayerNorm ln_s, ln_g, ln_out;
    nn::MultiHeadAttention att_sg, att_gs;  // producing F_{S<-G} and F_{G<-S}
    nn::Mlp mlp;

    FusionBlock() = default;
    FusionBlock(const FusionParams& p, std::uint64_t seed);

    struct Cache {
        nn::LayerNorm::Cache ln_s, ln_g, ln_out;
        nn::MultiHeadAttention::Cache att_sg, att_gs;
        Matrix merged;
        nn::Mlp::Cache mlp;
    };

    Matrix forward(const Matrix& f_s, const Matrix& f_g, Cache* cache = nullptr,
                   const nn::DropoutCtx& dropout = {}) const;
    // Accumulates (+=) dL/df_s and dL/df_g into non-null targets and parameter
    // gradients into the submodules.
    void backward(Cache& cache, const Matrix& dy, Matrix* df_s, Matrix* df_g);

    FeatureSequence fuse(const FeatureSequence& sem, const FeatureSequence& geo,
                         Cache* cache = nullptr, const nn::DropoutCtx& dropout = {}) const;

    void zero_grad();
    void visit_params(const nn::ParamVisitor& f);
};

}  // namespace radar::fusion
