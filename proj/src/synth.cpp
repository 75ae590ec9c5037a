#include "radar/synth.hpp"

#include <algorithm>
#include <cmath>

#include "radar/rng.hpp"

namespace radar::synth {

namespace {

// Bilinearly interpolated random lattice, one octave.
Plane value_noise(Index h, Index w, Index cell, Rng& rng) {
    const Index gh = h / cell + 2, gw = w / cell + 2;
    Plane lattice(gh, gw);
    std::uniform_real_distribution<Scalar> uni(0.0, 1.0);
    for (Index y = 0; y < gh; ++y)
        for (Index x = 0; x < gw; ++x) lattice(y, x) = uni(rng);

    Plane out(h, w);
    for (Index y = 0; y < h; ++y) {
        const Scalar fy = static_cast<Scalar>(y) / cell;
        const Index y0 = static_cast<Index>(fy);
        const Scalar wy = fy - y0;
        for (Index x = 0; x < w; ++x) {
            const Scalar fx = static_cast<Scalar>(x) / cell;
            const Index x0 = static_cast<Index>(fx);
            const Scalar wx = fx - x0;
            out(y, x) = (1 - wy) * ((1 - wx) * lattice(y0, x0) + wx * lattice(y0, x0 + 1)) +
                        wy * ((1 - wx) * lattice(y0 + 1, x0) + wx * lattice(y0 + 1, x0 + 1));
        }
    }
    return out;
}

}  // namespace

Image generate_base_image(Index height, Index width, std::uint64_t seed) {
    Rng rng = make_rng(seed, "base-image");
    std::uniform_real_distribution<Scalar> uni(0.0, 1.0);

    Plane octaves = Plane::Zero(height, width);
    Scalar amp = 1.0, total = 0.0;
    for (Index cell : {32, 16, 8}) {
        octaves += amp * value_noise(height, width, std::min<Index>(cell, height), rng);
        total += amp;
        amp *= 0.5;
    }
    octaves /= total;

    Image img(height, width);
    const Scalar base_r = 40 + 150 * uni(rng);
    const Scalar base_g = 40 + 150 * uni(rng);
    const Scalar base_b = 40 + 150 * uni(rng);
    img.r = base_r + 70.0 * (octaves - 0.5);
    img.g = base_g + 70.0 * (octaves - 0.5);
    img.b = base_b + 55.0 * (value_noise(height, width, 16, rng) - 0.5);

    const int shapes = 3 + static_cast<int>(uni(rng) * 4);
    for (int s = 0; s < shapes; ++s) {
        const Scalar cy = uni(rng) * height;
        const Scalar cx = uni(rng) * width;
        const Scalar ry = (0.06 + 0.18 * uni(rng)) * height;
        const Scalar rx = (0.06 + 0.18 * uni(rng)) * width;
        const Scalar cr = 255 * uni(rng), cg = 255 * uni(rng), cb = 255 * uni(rng);
        const bool box = uni(rng) < 0.4;
        const Scalar edge = 2.0 + 4.0 * uni(rng);
        for (Index y = 0; y < height; ++y)
            for (Index x = 0; x < width; ++x) {
                Scalar d;
                if (box) {
                    const Scalar dy = std::abs(y - cy) - ry;
                    const Scalar dx = std::abs(x - cx) - rx;
                    d = std::max(dy, dx);
                } else {
                    const Scalar dy = (y - cy) / ry, dx = (x - cx) / rx;
                    d = (std::sqrt(dy * dy + dx * dx) - 1.0) * std::min(ry, rx);
                }
                const Scalar alpha = std::clamp(0.5 - d / edge, 0.0, 0.85);
                if (alpha <= 0) continue;
                img.r(y, x) = (1 - alpha) * img.r(y, x) + alpha * cr;
                img.g(y, x) = (1 - alpha) * img.g(y, x) + alpha * cg;
                img.b(y, x) = (1 - alpha) * img.b(y, x) + alpha * cb;
            }
    }

    std::normal_distribution<Scalar> grain(0.0, 1.2);
    for (Index y = 0; y < height; ++y)
        for (Index x = 0; x < width; ++x) {
            const Scalar n = grain(rng);
            img.r(y, x) += n;
            img.g(y, x) += n;
            img.b(y, x) += grain(rng) * 0.5;
        }

    img.r = img.r.max(0.0).min(255.0);
    img.g = img.g.max(0.0).min(255.0);
    img.b = img.b.max(0.0).min(255.0);
    return quantize(img);
}

}  // namespace radar::synth
