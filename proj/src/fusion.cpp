#include "radar/fusion.hpp"

#include <cmath>
#include <stdexcept>

#include "radar/errors.hpp"

namespace radar {

void FeatureSequence::validate() const {
    if (features.rows() != grid.count())
        throw ValidationError("feature row count does not match patch grid");
    if (features.cols() <= 0) throw ValidationError("feature width must be positive");
    if (!features.allFinite()) throw ValidationError("feature matrix contains non-finite values");
}

}  // namespace radar

namespace radar::fusion {

FusionMode fusion_mode_from_string(const std::string& s) {
    if (s == "xattn") return FusionMode::CrossAttention;
    if (s == "concat") return FusionMode::Concat;
    if (s == "sum") return FusionMode::Sum;
    if (s == "semantic-only") return FusionMode::SemanticOnly;
    if (s == "geometry-only") return FusionMode::GeometryOnly;
    throw ConfigurationError("unknown fusion mode: " + s);
}

std::string to_string(FusionMode mode) {
    switch (mode) {
        case FusionMode::CrossAttention: return "xattn";
        case FusionMode::Concat: return "concat";
        case FusionMode::Sum: return "sum";
        case FusionMode::SemanticOnly: return "semantic-only";
        case FusionMode::GeometryOnly: return "geometry-only";
    }
    throw ConfigurationError("invalid fusion mode value");
}

AttentionConvention convention_from_string(const std::string& s) {
    if (s == "as-written") return AttentionConvention::AsWritten;
    if (s == "q-from-self") return AttentionConvention::QFromSelf;
    throw ConfigurationError("unknown attention convention: " + s);
}

std::string to_string(AttentionConvention c) {
    return c == AttentionConvention::AsWritten ? "as-written" : "q-from-self";
}

Index FusionParams::mlp_input_dim() const {
    switch (mode) {
        case FusionMode::CrossAttention:
        case FusionMode::Concat: return 2 * feature_dim;
        case FusionMode::Sum:
        case FusionMode::SemanticOnly:
        case FusionMode::GeometryOnly: return feature_dim;
    }
    throw ConfigurationError("invalid fusion mode value");
}

void FusionParams::validate() const {
    if (feature_dim <= 0) throw ConfigurationError("feature_dim must be positive");
    if (num_heads <= 0) throw ConfigurationError("num_heads must be positive");
    if (mode == FusionMode::CrossAttention && feature_dim % num_heads != 0)
        throw ConfigurationError("feature_dim must be divisible by num_heads");
    if (dropout_rate < 0 || dropout_rate >= 1)
        throw ConfigurationError("dropout_rate must lie in [0, 1)");
}

FusionBlock::FusionBlock(const FusionParams& p, std::uint64_t seed) : params(p) {
    params.validate();
    const Index d = params.feature_dim;
    Rng rng = make_rng(seed, "fusion");
    if (params.mode == FusionMode::CrossAttention) {
        ln_s.init(d);
        ln_g.init(d);
        att_sg.init(d, params.num_heads, rng);
        att_gs.init(d, params.num_heads, rng);
    }
    mlp.init(params.mlp_input_dim(), params.hidden(), d, rng);
    ln_out.init(d);
}

Matrix FusionBlock::forward(const Matrix& f_s, const Matrix& f_g, Cache* cache,
                            const nn::DropoutCtx& dropout) const {
    const Index d = params.feature_dim;
    if (f_s.cols() != d || f_g.cols() != d)
        throw std::invalid_argument("fusion input width does not match feature_dim");
    if (f_s.rows() != f_g.rows())
        throw std::invalid_argument("fusion inputs must have equal patch counts");

    Cache local;
    Cache& c = cache ? *cache : local;

    switch (params.mode) {
        case FusionMode::CrossAttention: {
            Matrix ns = ln_s.forward(f_s, &c.ln_s);
            Matrix ng = ln_g.forward(f_g, &c.ln_g);
            Matrix a_sg, a_gs;
            if (params.convention == AttentionConvention::AsWritten) {
                a_sg = att_sg.forward(ng, ns, ng, &c.att_sg, dropout);
                a_gs = att_gs.forward(ns, ng, ns, &c.att_gs, dropout);
            } else {
                a_sg = att_sg.forward(ns, ng, ng, &c.att_sg, dropout);
                a_gs = att_gs.forward(ng, ns, ns, &c.att_gs, dropout);
            }
            c.merged.resize(f_s.rows(), 2 * d);
            c.merged << f_s + a_sg, f_g + a_gs;
            break;
        }
        case FusionMode::Concat:
            c.merged.resize(f_s.rows(), 2 * d);
            c.merged << f_s, f_g;
            break;
        case FusionMode::Sum: c.merged = f_s + f_g; break;
        case FusionMode::SemanticOnly: c.merged = f_s; break;
        case FusionMode::GeometryOnly: c.merged = f_g; break;
    }
    Matrix mixed = mlp.forward(c.merged, &c.mlp, dropout);
    return ln_out.forward(mixed, &c.ln_out);
}

void FusionBlock::backward(Cache& cache, const Matrix& dy, Matrix* df_s, Matrix* df_g) {
    const Index d = params.feature_dim;
    Matrix dmixed = ln_out.backward(cache.ln_out, dy);
    Matrix dmerged = mlp.backward(cache.mlp, dmixed);

    switch (params.mode) {
        case FusionMode::CrossAttention: {
            const Matrix da_sg = dmerged.leftCols(d);
            const Matrix da_gs = dmerged.rightCols(d);
            const Index n = dy.rows();
            Matrix dns = Matrix::Zero(n, d), dng = Matrix::Zero(n, d);
            if (params.convention == AttentionConvention::AsWritten) {
                att_sg.backward(cache.att_sg, da_sg, &dng, &dns, &dng);
                att_gs.backward(cache.att_gs, da_gs, &dns, &dng, &dns);
            } else {
                att_sg.backward(cache.att_sg, da_sg, &dns, &dng, &dng);
                att_gs.backward(cache.att_gs, da_gs, &dng, &dns, &dns);
            }
            if (df_s) *df_s += da_sg + ln_s.backward(cache.ln_s, dns);
            else ln_s.backward(cache.ln_s, dns);
            if (df_g) *df_g += da_gs + ln_g.backward(cache.ln_g, dng);
            else ln_g.backward(cache.ln_g, dng);
            break;
        }
        case FusionMode::Concat:
            if (df_s) *df_s += dmerged.leftCols(d);
            if (df_g) *df_g += dmerged.rightCols(d);
            break;
        case FusionMode::Sum:
            if (df_s) *df_s += dmerged;
            if (df_g) *df_g += dmerged;
            break;
        case FusionMode::SemanticOnly:
            if (df_s) *df_s += dmerged;
            break;
        case FusionMode::GeometryOnly:
            if (df_g) *df_g += dmerged;
            break;
    }
}

FeatureSequence FusionBlock::fuse(const FeatureSequence& sem, const FeatureSequence& geo,
                                  Cache* cache, const nn::DropoutCtx& dropout) const {
    sem.validate();
    geo.validate();
    if (sem.grid.count() != geo.grid.count())
        throw std::invalid_argument("modalities disagree on patch count");
    FeatureSequence out;
    out.features = forward(sem.features, geo.features, cache, dropout);
    out.grid = sem.grid;
    out.modality = Modality::Fused;
    return out;
}

void FusionBlock::zero_grad() {
    if (params.mode == FusionMode::CrossAttention) {
        ln_s.zero_grad();
        ln_g.zero_grad();
        att_sg.zero_grad();
        att_gs.zero_grad();
    }
    mlp.zero_grad();
    ln_out.zero_grad();
}

void FusionBlock::visit_params(const nn::ParamVisitor& f) {
    if (params.mode == FusionMode::CrossAttention) {
        ln_s.visit_params(f);
        ln_g.visit_params(f);
        att_sg.visit_params(f);
        att_gs.visit_params(f);
    }
    mlp.visit_params(f);
    ln_out.visit_params(f);
}

}  // namespace radar::fusion
