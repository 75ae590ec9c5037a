#include "radar/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace radar::nn {

Matrix xavier_normal(Index in, Index out, Rng& rng) {
    std::normal_distribution<Scalar> dist(0.0, std::sqrt(2.0 / static_cast<Scalar>(in + out)));
    Matrix w(in, out);
    for (Index i = 0; i < in; ++i)
        for (Index j = 0; j < out; ++j) w(i, j) = dist(rng);
    return w;
}

Matrix dropout_mask(Index rows, Index cols, const DropoutCtx& ctx) {
    std::uniform_real_distribution<Scalar> uni(0.0, 1.0);
    const Scalar keep = 1.0 - ctx.rate;
    Matrix mask(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j)
            mask(i, j) = uni(*ctx.rng) < ctx.rate ? 0.0 : 1.0 / keep;
    return mask;
}

Index param_count(const std::function<void(const ParamVisitor&)>& visit) {
    Index total = 0;
    visit([&total](Scalar*, Scalar*, Index n) { total += n; });
    return total;
}

// --- Linear ----------------------------------------------------------------

void Linear::init(Index in, Index out, Rng& rng) {
    W = xavier_normal(in, out, rng);
    b = Vector::Zero(out);
    zero_grad();
}

void Linear::zero_grad() {
    gW = Matrix::Zero(W.rows(), W.cols());
    gb = Vector::Zero(b.size());
}

void Linear::visit_params(const ParamVisitor& f) {
    f(W.data(), gW.data(), W.size());
    f(b.data(), gb.data(), b.size());
}

Matrix Linear::forward(const Matrix& x) const {
    return (x * W).rowwise() + b.transpose();
}

Matrix Linear::backward(const Matrix& x, const Matrix& dy) {
    gW.noalias() += x.transpose() * dy;
    gb.noalias() += dy.colwise().sum().transpose();
    return dy * W.transpose();
}

// --- LayerNorm -------------------------------------------------------------

void LayerNorm::init(Index dim) {
    gamma = Vector::Ones(dim);
    beta = Vector::Zero(dim);
    zero_grad();
}

void LayerNorm::zero_grad() {
    ggamma = Vector::Zero(gamma.size());
    gbeta = Vector::Zero(beta.size());
}

void LayerNorm::visit_params(const ParamVisitor& f) {
    f(gamma.data(), ggamma.data(), gamma.size());
    f(beta.data(), gbeta.data(), beta.size());
}

Matrix LayerNorm::forward(const Matrix& x, Cache* cache) const {
    const Index n = x.rows(), d = x.cols();
    Matrix xhat(n, d);
    Vector rstd(n);
    for (Index i = 0; i < n; ++i) {
        const Scalar mu = x.row(i).mean();
        const Scalar var = (x.row(i).array() - mu).square().mean();
        rstd(i) = 1.0 / std::sqrt(var + kEps);
        xhat.row(i) = (x.row(i).array() - mu) * rstd(i);
    }
    Matrix y = xhat;
    y.array().rowwise() *= gamma.transpose().array();
    y.array().rowwise() += beta.transpose().array();
    if (cache) {
        cache->xhat = std::move(xhat);
        cache->rstd = std::move(rstd);
    }
    return y;
}

Matrix LayerNorm::backward(const Cache& cache, const Matrix& dy) {
    const Index n = dy.rows(), d = dy.cols();
    ggamma.noalias() += (dy.array() * cache.xhat.array()).colwise().sum().matrix().transpose();
    gbeta.noalias() += dy.colwise().sum().transpose();

    Matrix dx(n, d);
    for (Index i = 0; i < n; ++i) {
        const auto dxhat = (dy.row(i).array() * gamma.transpose().array()).eval();
        const Scalar m1 = dxhat.mean();
        const Scalar m2 = (dxhat * cache.xhat.row(i).array()).mean();
        dx.row(i) =
            (cache.rstd(i) * (dxhat - m1 - cache.xhat.row(i).array() * m2)).matrix();
    }
    return dx;
}

// --- Mlp -------------------------------------------------------------------

void Mlp::init(Index in, Index hidden, Index out, Rng& rng) {
    fc1.init(in, hidden, rng);
    fc2.init(hidden, out, rng);
}

void Mlp::init_identity(Index dim) {
    if (fc1.W.rows() == 0) {
        Rng dummy(0);
        init(dim, 2 * dim, dim, dummy);
    }
    if (fc1.W.rows() != dim || fc1.W.cols() != 2 * dim || fc2.W.cols() != dim)
        throw std::invalid_argument("identity init requires in == out and hidden == 2 * in");
    fc1.W << Matrix::Identity(dim, dim), -Matrix::Identity(dim, dim);
    fc1.b.setZero();
    fc2.W << Matrix::Identity(dim, dim), -Matrix::Identity(dim, dim);
    fc2.b.setZero();
}

void Mlp::zero_grad() {
    fc1.zero_grad();
    fc2.zero_grad();
}

void Mlp::visit_params(const ParamVisitor& f) {
    fc1.visit_params(f);
    fc2.visit_params(f);
}

Matrix Mlp::forward(const Matrix& x, Cache* cache, const DropoutCtx& dropout) const {
    Matrix pre = fc1.forward(x);
    Matrix hidden = numeric::gelu(pre);
    Matrix drop;
    if (dropout.active()) {
        drop = dropout_mask(hidden.rows(), hidden.cols(), dropout);
        hidden = hidden.cwiseProduct(drop);
    }
    Matrix y = fc2.forward(hidden);
    if (cache) {
        cache->x = x;
        cache->pre = std::move(pre);
        cache->hidden = std::move(hidden);
        cache->drop = std::move(drop);
    }
    return y;
}

Matrix Mlp::backward(Cache& cache, const Matrix& dy) {
    Matrix dhidden = fc2.backward(cache.hidden, dy);
    if (cache.drop.size() > 0) dhidden = dhidden.cwiseProduct(cache.drop);
    Matrix dpre = dhidden.cwiseProduct(numeric::gelu_grad(cache.pre));
    return fc1.backward(cache.x, dpre);
}

// --- MultiHeadAttention ----------------------------------------------------

void MultiHeadAttention::init(Index dim_, Index heads_, Rng& rng) {
    if (dim_ % heads_ != 0) throw std::invalid_argument("dim must be divisible by heads");
    dim = dim_;
    heads = heads_;
    proj_q.init(dim, dim, rng);
    proj_k.init(dim, dim, rng);
    proj_v.init(dim, dim, rng);
    proj_o.init(dim, dim, rng);
}

void MultiHeadAttention::zero_grad() {
    proj_q.zero_grad();
    proj_k.zero_grad();
    proj_v.zero_grad();
    proj_o.zero_grad();
}

void MultiHeadAttention::visit_params(const ParamVisitor& f) {
    proj_q.visit_params(f);
    proj_k.visit_params(f);
    proj_v.visit_params(f);
    proj_o.visit_params(f);
}

Matrix MultiHeadAttention::forward(const Matrix& x_q, const Matrix& x_k, const Matrix& x_v,
                                   Cache* cache, const DropoutCtx& dropout) const {
    if (x_q.cols() != dim || x_k.cols() != dim || x_v.cols() != dim)
        throw std::invalid_argument("attention input width mismatch");
    if (x_k.rows() != x_v.rows())
        throw std::invalid_argument("key and value sequences must share length");

    const Index n = x_q.rows();
    const Index m = x_k.rows();
    const Index dh = dim / heads;
    const Scalar scale = 1.0 / std::sqrt(static_cast<Scalar>(dh));

    Matrix q = proj_q.forward(x_q);
    Matrix k = proj_k.forward(x_k);
    Matrix v = proj_v.forward(x_v);

    Matrix concat(n, dim);
    std::vector<Matrix> attn(heads), drop;
    if (dropout.active()) drop.resize(heads);
    for (Index h = 0; h < heads; ++h) {
        const auto qh = q.middleCols(h * dh, dh);
        const auto kh = k.middleCols(h * dh, dh);
        const auto vh = v.middleCols(h * dh, dh);
        Matrix scores = (qh * kh.transpose()) * scale;
        attn[h] = numeric::softmax_rows(scores);
        Matrix a = attn[h];
        if (dropout.active()) {
            drop[h] = dropout_mask(n, m, dropout);
            a = a.cwiseProduct(drop[h]);
        }
        concat.middleCols(h * dh, dh).noalias() = a * vh;
    }
    Matrix y = proj_o.forward(concat);
    if (cache) {
        cache->x_q = x_q;
        cache->x_k = x_k;
        cache->x_v = x_v;
        cache->q = std::move(q);
        cache->k = std::move(k);
        cache->v = std::move(v);
        cache->attn = std::move(attn);
        cache->drop = std::move(drop);
        cache->concat = std::move(concat);
    }
    return y;
}

void MultiHeadAttention::backward(Cache& cache, const Matrix& dy, Matrix* dx_q, Matrix* dx_k,
                                  Matrix* dx_v) {
    const Index n = dy.rows();
    const Index m = cache.x_k.rows();
    const Index dh = dim / heads;
    const Scalar scale = 1.0 / std::sqrt(static_cast<Scalar>(dh));

    Matrix dconcat = proj_o.backward(cache.concat, dy);
    Matrix dq(n, dim), dk(m, dim), dv(m, dim);
    for (Index h = 0; h < heads; ++h) {
        const auto qh = cache.q.middleCols(h * dh, dh);
        const auto kh = cache.k.middleCols(h * dh, dh);
        const auto vh = cache.v.middleCols(h * dh, dh);
        const auto dout = dconcat.middleCols(h * dh, dh);

        Matrix a = cache.attn[h];
        if (!cache.drop.empty()) a = a.cwiseProduct(cache.drop[h]);
        // dout = a * vh
        Matrix da = dout * vh.transpose();
        dv.middleCols(h * dh, dh).noalias() = a.transpose() * dout;
        if (!cache.drop.empty()) da = da.cwiseProduct(cache.drop[h]);
        Matrix dscores = numeric::softmax_rows_backward(cache.attn[h], da) * scale;
        dq.middleCols(h * dh, dh).noalias() = dscores * kh;
        dk.middleCols(h * dh, dh).noalias() = dscores.transpose() * qh;
    }
    if (dx_q) *dx_q += proj_q.backward(cache.x_q, dq);
    if (dx_k) *dx_k += proj_k.backward(cache.x_k, dk);
    if (dx_v) *dx_v += proj_v.backward(cache.x_v, dv);
}

}  // namespace radar::nn
