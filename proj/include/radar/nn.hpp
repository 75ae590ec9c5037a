#pragma once

#include <functional>
#include <vector>

#include "radar/numeric.hpp"
#include "radar/rng.hpp"
#include "radar/types.hpp"

namespace radar::nn {

// Called with (parameter data, gradient data, element count) per tensor.
using ParamVisitor = std::function<void(Scalar*, Scalar*, Index)>;

// Inverted dropout, active only when a rate and an RNG are supplied.
struct DropoutCtx {
    Scalar rate = 0;
    Rng* rng = nullptr;
    bool active() const { return rate > 0 && rng != nullptr; }
};

Matrix dropout_mask(Index rows, Index cols, const DropoutCtx& ctx);

struct Linear {
    Matrix W;  // in x out
    Vector b;
    Matrix gW;
    Vector gb;

    void init(Index in, Index out, Rng& rng);
    void zero_grad();
    void visit_params(const ParamVisitor& f);

    Matrix forward(const Matrix& x) const;
    // Accumulates gW/gb, returns dL/dx.
    Matrix backward(const Matrix& x, const Matrix& dy);
};

// Row-wise layer normalisation over the feature dimension.
struct LayerNorm {
    Vector gamma, beta;
    Vector ggamma, gbeta;
    static constexpr Scalar kEps = 1e-5;

    struct Cache {
        Matrix xhat;
        Vector rstd;
    };

    void init(Index dim);
    void zero_grad();
    void visit_params(const ParamVisitor& f);

    Matrix forward(const Matrix& x, Cache* cache) const;
    Matrix backward(const Cache& cache, const Matrix& dy);
};

// Single-hidden-layer MLP with GELU activation, applied row-wise.
struct Mlp {
    Linear fc1, fc2;

    struct Cache {
        Matrix x;
        Matrix pre;   // fc1 output before activation
        Matrix hidden;
        Matrix drop;  // empty when dropout inactive
    };

    void init(Index in, Index hidden, Index out, Rng& rng);
    // Exact identity map: requires in == out and hidden == 2 * in
    // (uses gelu(x) - gelu(-x) == x).
    void init_identity(Index dim);
    void zero_grad();
    void visit_params(const ParamVisitor& f);

    Matrix forward(const Matrix& x, Cache* cache, const DropoutCtx& dropout = {}) const;
    Matrix backward(Cache& cache, const Matrix& dy);
};

// Multi-head scaled dot-product attention. Query, key and value sequences
// are separate inputs so callers choose the pairing; pass the same matrix
// for roles that share a source.
struct MultiHeadAttention {
    Index dim = 0;
    Index heads = 1;
    Linear proj_q, proj_k, proj_v, proj_o;

    struct Cache {
        Matrix x_q, x_k, x_v;
        Matrix q, k, v;
        std::vector<Matrix> attn;  // softmax output per head (pre-dropout)
        std::vector<Matrix> drop;  // dropout masks per head (empty if inactive)
        Matrix concat;
    };

    void init(Index dim_, Index heads_, Rng& rng);
    void zero_grad();
    void visit_params(const ParamVisitor& f);

    Matrix forward(const Matrix& x_q, const Matrix& x_k, const Matrix& x_v, Cache* cache,
                   const DropoutCtx& dropout = {}) const;
    // Accumulates (+=) input gradients into any non-null targets; aliasing the
    // same target for several roles sums the contributions.
    void backward(Cache& cache, const Matrix& dy, Matrix* dx_q, Matrix* dx_k, Matrix* dx_v);
};

// Seeded Gaussian init with Xavier scaling.
Matrix xavier_normal(Index in, Index out, Rng& rng);

Index param_count(const std::function<void(const ParamVisitor&)>& visit);

}  // namespace radar::nn
