#include "radar/heads.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "radar/image.hpp"
#include "radar/numeric.hpp"

namespace radar::heads {

namespace {

// Adjoint of image.cpp's resize_bilinear: scatter the output gradient back
// through the same half-pixel-centre interpolation weights.
Plane resize_bilinear_adjoint(const Plane& dmap, Index in_h, Index in_w) {
    if (dmap.rows() == in_h && dmap.cols() == in_w) return dmap;
    Plane dsrc = Plane::Zero(in_h, in_w);
    const Scalar sy = static_cast<Scalar>(in_h) / static_cast<Scalar>(dmap.rows());
    const Scalar sx = static_cast<Scalar>(in_w) / static_cast<Scalar>(dmap.cols());
    for (Index y = 0; y < dmap.rows(); ++y) {
        const Scalar fy = std::clamp<Scalar>((y + 0.5) * sy - 0.5, 0.0, in_h - 1.0);
        const Index y0 = static_cast<Index>(std::floor(fy));
        const Index y1 = std::min(y0 + 1, in_h - 1);
        const Scalar wy = fy - y0;
        for (Index x = 0; x < dmap.cols(); ++x) {
            const Scalar fx = std::clamp<Scalar>((x + 0.5) * sx - 0.5, 0.0, in_w - 1.0);
            const Index x0 = static_cast<Index>(std::floor(fx));
            const Index x1 = std::min(x0 + 1, in_w - 1);
            const Scalar wx = fx - x0;
            const Scalar d = dmap(y, x);
            dsrc(y0, x0) += (1 - wy) * (1 - wx) * d;
            dsrc(y0, x1) += (1 - wy) * wx * d;
            dsrc(y1, x0) += wy * (1 - wx) * d;
            dsrc(y1, x1) += wy * wx * d;
        }
    }
    return dsrc;
}

}  // namespace

LocalisationHead::LocalisationHead(Index feature_dim_, std::uint64_t seed)
    : feature_dim(feature_dim_) {
    if (feature_dim <= 0) throw std::invalid_argument("feature_dim must be positive");
    Rng rng = make_rng(seed, "localisation");
    W = nn::xavier_normal(9, feature_dim, rng);
    b = Vector::Zero(1);
    zero_grad();
}

void LocalisationHead::zero_grad() {
    gW = Matrix::Zero(W.rows(), W.cols());
    gb = Vector::Zero(1);
}

void LocalisationHead::visit_params(const nn::ParamVisitor& f) {
    f(W.data(), gW.data(), W.size());
    f(b.data(), gb.data(), b.size());
}

TamperMap LocalisationHead::forward(const FeatureSequence& fused, Index out_h, Index out_w,
                                    Cache* cache) const {
    if (fused.modality != Modality::Fused)
        throw std::invalid_argument("localisation expects a fused feature sequence");
    fused.validate();
    if (fused.dim() != feature_dim)
        throw std::invalid_argument("feature width does not match localisation head");
    if (out_h <= 0 || out_w <= 0) throw std::invalid_argument("target size must be positive");

    const Index rows = fused.grid.rows, cols = fused.grid.cols;
    Plane logits(rows, cols);
    for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c < cols; ++c) {
            Scalar acc = b(0);
            for (Index dy = -1; dy <= 1; ++dy)
                for (Index dx = -1; dx <= 1; ++dx) {
                    const Index rr = r + dy, cc = c + dx;
                    if (rr < 0 || rr >= rows || cc < 0 || cc >= cols) continue;
                    const Index k = (dy + 1) * 3 + (dx + 1);
                    acc += W.row(k).dot(fused.features.row(rr * cols + cc));
                }
            logits(r, c) = acc;
        }

    Plane probs = logits.unaryExpr([](Scalar v) { return numeric::sigmoid(v); });
    TamperMap map{resize_bilinear(probs, out_h, out_w)};
    if (cache) {
        cache->features = fused.features;
        cache->grid_rows = rows;
        cache->grid_cols = cols;
        cache->probs_grid = std::move(probs);
        cache->out_h = out_h;
        cache->out_w = out_w;
    }
    return map;
}

Matrix LocalisationHead::backward(Cache& cache, const Plane& dmap) {
    const Index rows = cache.grid_rows, cols = cache.grid_cols;
    Plane dprobs = resize_bilinear_adjoint(dmap, rows, cols);
    Plane dlogits = dprobs * cache.probs_grid * (1.0 - cache.probs_grid);

    Matrix dfeat = Matrix::Zero(rows * cols, feature_dim);
    for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c < cols; ++c) {
            const Scalar d = dlogits(r, c);
            gb(0) += d;
            for (Index dy = -1; dy <= 1; ++dy)
                for (Index dx = -1; dx <= 1; ++dx) {
                    const Index rr = r + dy, cc = c + dx;
                    if (rr < 0 || rr >= rows || cc < 0 || cc >= cols) continue;
                    const Index k = (dy + 1) * 3 + (dx + 1);
                    gW.row(k) += d * cache.features.row(rr * cols + cc);
                    dfeat.row(rr * cols + cc) += d * W.row(k);
                }
        }
    return dfeat;
}

Scalar loc_loss(const TamperMap& pred, const Mask& target) {
    Plane unused;
    return loc_loss_backward(pred, target, unused);
}

Scalar loc_loss_backward(const TamperMap& pred, const Mask& target, Plane& dpred) {
    const Plane& p = pred.probabilities;
    if (p.rows() != target.rows() || p.cols() != target.cols())
        throw std::invalid_argument("prediction and target shapes differ");
    const Index h = p.rows(), w = p.cols();
    const Scalar n = static_cast<Scalar>(h) * static_cast<Scalar>(w);

    dpred = Plane::Zero(h, w);
    Scalar bce = 0, inter = 0, psum = 0, ysum = 0;
    for (Index y = 0; y < h; ++y)
        for (Index x = 0; x < w; ++x) {
            const Scalar raw = p(y, x);
            const Scalar pc = std::clamp(raw, kBceClip, 1.0 - kBceClip);
            const Scalar t = static_cast<Scalar>(target(y, x));
            bce += -(t * std::log(pc) + (1.0 - t) * std::log(1.0 - pc));
            if (raw > kBceClip && raw < 1.0 - kBceClip)
                dpred(y, x) = (-(t / pc) + (1.0 - t) / (1.0 - pc)) / n;
            inter += raw * t;
            psum += raw;
            ysum += t;
        }
    bce /= n;

    const Scalar num = 2.0 * inter + kDiceSmooth;
    const Scalar den = psum + ysum + kDiceSmooth;
    const Scalar dice = 1.0 - num / den;
    for (Index y = 0; y < h; ++y)
        for (Index x = 0; x < w; ++x) {
            const Scalar t = static_cast<Scalar>(target(y, x));
            dpred(y, x) += -(2.0 * t * den - num) / (den * den);
        }
    return bce + dice;
}

Scalar detection_score(const TamperMap& map) {
    const Index h = map.height(), w = map.width();
    if (h <= 0 || w <= 0) throw std::invalid_argument("empty tamper map");
    const Index total = h * w;
    const Index k = static_cast<Index>(
        std::ceil(0.01 * static_cast<Scalar>(total)));
    std::vector<Scalar> values(map.probabilities.data(), map.probabilities.data() + total);
    std::nth_element(values.begin(), values.begin() + (k - 1), values.end(),
                     std::greater<Scalar>());
    Scalar sum = 0;
    for (Index i = 0; i < k; ++i) sum += values[static_cast<std::size_t>(i)];
    return sum / static_cast<Scalar>(k);
}

bool detect(const TamperMap& map) { return detection_score(map) > 0.5; }

}  // namespace radar::heads
