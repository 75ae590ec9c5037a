#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "radar/types.hpp"

namespace radar::maskgen {

// Acceptance window for object masks as a fraction of image area.
inline constexpr Scalar kMinAreaFraction = 0.0023;
inline constexpr Scalar kMaxAreaFraction = 0.83;

inline constexpr int kMaxDilationRounds = 5;
inline constexpr int kComponentTarget = 8;  // dilate while components >= this

struct AreaFilterResult {
    bool accepted = false;
    Scalar area_fraction = 0;
};

// Accepts masks covering [0.23%, 83%] of the image; returns the exact fraction.
AreaFilterResult filter_mask_by_area(const Mask& mask);

struct CohesionResult {
    Mask mask;
    int dilations_applied = 0;
    int components = 0;
};

// 3x3 square dilation, one iteration.
Mask dilate(const Mask& mask);

// 8-connected component count.
int count_components(const Mask& mask);

// Applies at least one dilation, then keeps dilating (five rounds total at
// most) while the mask still has 8 or more connected components.
CohesionResult cohere_mask(const Mask& mask);

// Centroid (row, col) of the set pixels; (0,0) for an empty mask.
std::pair<Scalar, Scalar> mask_centroid(const Mask& mask);

// Filled polygon over 8 random points ordered by angle about their centroid,
// rescaled about the centroid until the covered area is within 2% (absolute)
// of target_area. Deterministic given seed.
Mask random_polygon_mask(Index height, Index width, Scalar target_area, std::uint64_t seed);

inline constexpr Scalar kPolygonAreaTolerance = 0.02;
inline constexpr int kPolygonScaleAttempts = 50;

// Bootstrap draw from the empirical area distribution.
Scalar sample_area_target(const std::vector<Scalar>& observed_areas, std::uint64_t seed);

// Metadata for one accepted mask (the masks themselves live next to it; the
// manifest stores file paths instead).
struct MaskRecord {
    int mask_number = 0;
    Mask original_mask;
    Mask edited_mask;
    std::string masked_object;
    Scalar area_percentage = 0;
    std::pair<Scalar, Scalar> centroid{0, 0};
};

}  // namespace radar::maskgen
