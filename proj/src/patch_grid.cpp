#include "radar/patch_grid.hpp"

#include <algorithm>
#include <stdexcept>

namespace radar {

void PatchGrid::patch_bounds(Index p, Index* y0, Index* y1, Index* x0, Index* x1) const {
    const Index pr = p / cols;
    const Index pc = p % cols;
    *y0 = pr * patch_size;
    *y1 = std::min(*y0 + patch_size, image_height);
    *x0 = pc * patch_size;
    *x1 = std::min(*x0 + patch_size, image_width);
}

Index PatchLabels::count(PatchClass c) const {
    return static_cast<Index>(std::count(labels.begin(), labels.end(), c));
}

PatchGrid build_patch_grid(Index height, Index width, Index patch_size) {
    if (height <= 0 || width <= 0 || patch_size <= 0)
        throw std::invalid_argument("patch grid dimensions must be positive");
    PatchGrid grid;
    grid.image_height = height;
    grid.image_width = width;
    grid.patch_size = patch_size;
    grid.rows = (height + patch_size - 1) / patch_size;
    grid.cols = (width + patch_size - 1) / patch_size;
    return grid;
}

PatchLabels classify_patches(const PatchGrid& grid, const Mask& mask, bool is_tampered) {
    if (mask.rows() != grid.image_height || mask.cols() != grid.image_width)
        throw std::invalid_argument("mask dimensions do not match patch grid");

    PatchLabels out;
    out.labels.assign(static_cast<std::size_t>(grid.count()), PatchClass::Original);
    if (!is_tampered) return out;

    std::fill(out.labels.begin(), out.labels.end(), PatchClass::Affected);
    for (Index y = 0; y < mask.rows(); ++y)
        for (Index x = 0; x < mask.cols(); ++x)
            if (mask(y, x)) out.labels[static_cast<std::size_t>(grid.patch_of(y, x))] =
                PatchClass::Tampered;
    return out;
}

}  // namespace radar
