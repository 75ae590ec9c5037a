#pragma once

#include <cstdint>

#include "radar/feature_sequence.hpp"
#include "radar/nn.hpp"

namespace radar::heads {

// Per-pixel tamper probability map matching the source image dimensions.
struct TamperMap {
    Plane probabilities;

    Index height() const { return probabilities.rows(); }
    Index width() const { return probabilities.cols(); }
};

// 3x3 single-output-channel convolution over the patch grid, sigmoid, and
// bilinear upsampling to the requested pixel resolution.
struct LocalisationHead {
    Index feature_dim = 0;
    Matrix W;  // 9 x D, rows ordered (dy + 1) * 3 + (dx + 1)
    Vector b;  // single bias
    Matrix gW;
    Vector gb;

    LocalisationHead() = default;
    LocalisationHead(Index feature_dim_, std::uint64_t seed);

    struct Cache {
        Matrix features;  // N x D
        Index grid_rows = 0, grid_cols = 0;
        Plane probs_grid;  // rows x cols, post-sigmoid
        Index out_h = 0, out_w = 0;
    };

    TamperMap forward(const FeatureSequence& fused, Index out_h, Index out_w,
                      Cache* cache = nullptr) const;
    // dmap is the gradient on the output probabilities; accumulates gW/gb and
    // returns dL/dfeatures (N x D).
    Matrix backward(Cache& cache, const Plane& dmap);

    void zero_grad();
    void visit_params(const nn::ParamVisitor& f);
};

// Mean pixelwise binary cross-entropy (probabilities clipped to
// [1e-7, 1 - 1e-7]) plus dice loss with smoothing constant 1.
Scalar loc_loss(const TamperMap& pred, const Mask& target);

// Same value; fills dpred with dL/dprobabilities (resized, overwritten).
Scalar loc_loss_backward(const TamperMap& pred, const Mask& target, Plane& dpred);

inline constexpr Scalar kBceClip = 1e-7;
inline constexpr Scalar kDiceSmooth = 1.0;

// Mean of the ceil(0.01 * H * W) largest map values.
Scalar detection_score(const TamperMap& map);

// True iff detection_score(map) > 0.5 (strict).
bool detect(const TamperMap& map);

}  // namespace radar::heads
