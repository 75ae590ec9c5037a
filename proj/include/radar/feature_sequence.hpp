#pragma once

#include "radar/patch_grid.hpp"
#include "radar/types.hpp"

namespace radar {

enum class Modality { Semantic, Geometry, Fused };

// N x D patch feature matrix tied to the grid that produced it.
struct FeatureSequence {
    Matrix features;  // N x D
    PatchGrid grid;
    Modality modality = Modality::Semantic;

    Index patch_count() const { return features.rows(); }
    Index dim() const { return features.cols(); }

    // Throws when the row count disagrees with the grid or entries are non-finite.
    void validate() const;
};

}  // namespace radar
