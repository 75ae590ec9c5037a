#pragma once

#include <vector>

#include "radar/types.hpp"

namespace radar {

enum class PatchClass { Original, Tampered, Affected };

// Tiling of an image into patch_size x patch_size cells; boundary patches
// cover the edge remainder, so every pixel belongs to exactly one patch.
struct PatchGrid {
    Index image_height = 0;
    Index image_width = 0;
    Index patch_size = 0;
    Index rows = 0;
    Index cols = 0;

    Index count() const { return rows * cols; }

    Index patch_of(Index y, Index x) const {
        return (y / patch_size) * cols + (x / patch_size);
    }

    // Pixel extent of patch p: [y0, y1) x [x0, x1).
    void patch_bounds(Index p, Index* y0, Index* y1, Index* x0, Index* x1) const;

    bool operator==(const PatchGrid&) const = default;
};

struct PatchLabels {
    std::vector<PatchClass> labels;

    Index count(PatchClass c) const;
};

PatchGrid build_patch_grid(Index height, Index width, Index patch_size);

// Labels every patch. For untampered images all patches are Original; for
// tampered images a patch is Tampered iff it overlaps the mask by at least
// one pixel, Affected otherwise.
PatchLabels classify_patches(const PatchGrid& grid, const Mask& mask, bool is_tampered);

}  // namespace radar
