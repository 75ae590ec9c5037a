#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "radar/image.hpp"
#include "radar/rng.hpp"

namespace radar::datagen {

// One simulated inpainter. Outside the mask the image receives a mild global
// degradation (half-resolution round trip plus a colour shift) mimicking an
// autoencoder decode; inside the mask the content is replaced by a seeded
// noise texture blended over a smoothed copy of the context. Zero strengths
// give a bit-exact identity.
struct PseudoInpainterParams {
    std::string id = "pi-soft";
    Scalar outside_strength = 1.0;
    Scalar inside_strength = 1.0;
    Scalar colour_shift = 2.0;       // max per-channel offset outside the mask
    Scalar noise_scale = 2.0;        // texture correlation length in pixels
    Scalar noise_amp = 26.0;         // texture amplitude in pixel units
    Scalar context_blur_sigma = 5.0; // smoothing of the in-mask base content
    int jpeg_quality = 0;            // 0 disables the re-encode pass
    std::uint64_t seed = 0;
};

// The four bundled presets (pi-soft, pi-noisy, pi-jpeg, pi-smooth).
std::vector<PseudoInpainterParams> pseudo_inpainter_presets();
PseudoInpainterParams pseudo_inpainter_preset(const std::string& id);

Image pseudo_inpaint(const Image& image, const Mask& mask, const PseudoInpainterParams& params);

struct SampleGroup {
    Image original_image;
    std::vector<Image> tampered_images;
    Mask mask;
    std::string caption;
    std::vector<std::string> inpainter_ids;

    Index k() const { return static_cast<Index>(tampered_images.size()); }
    void validate() const;
};

// Applies every configured pseudo-inpainter to the image. With probability
// p_random the semantic mask is first replaced by a random polygon mask of
// matching area.
SampleGroup build_sample_group(const Image& image, const Mask& mask, const std::string& caption,
                               const std::vector<PseudoInpainterParams>& inpainters,
                               Scalar p_random, Rng& rng);

}  // namespace radar::datagen
