#pragma once

#include <cstdint>

#include "radar/image.hpp"

namespace radar::synth {

// Deterministic synthetic photograph stand-in: multi-octave value noise plus
// a handful of soft-edged colour shapes, quantised to integer pixel values.
Image generate_base_image(Index height, Index width, std::uint64_t seed);

}  // namespace radar::synth
