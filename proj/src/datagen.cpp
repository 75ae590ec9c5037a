#include "radar/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "radar/errors.hpp"
#include "radar/maskgen.hpp"

namespace radar::datagen {

namespace {

Plane smooth_noise(Index h, Index w, Scalar scale, Rng& rng) {
    const Index cell = std::max<Index>(1, static_cast<Index>(std::lround(scale)));
    const Index gh = h / cell + 2, gw = w / cell + 2;
    Plane lattice(gh, gw);
    std::normal_distribution<Scalar> gauss(0.0, 1.0);
    for (Index y = 0; y < gh; ++y)
        for (Index x = 0; x < gw; ++x) lattice(y, x) = gauss(rng);

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

void clamp_planes(Image& img) {
    img.r = img.r.max(0.0).min(255.0);
    img.g = img.g.max(0.0).min(255.0);
    img.b = img.b.max(0.0).min(255.0);
}

}  // namespace

std::vector<PseudoInpainterParams> pseudo_inpainter_presets() {
    std::vector<PseudoInpainterParams> p(4);
    p[0] = {"pi-soft", 1.0, 1.0, 2.0, 2.0, 26.0, 5.0, 0, 0};
    p[1] = {"pi-noisy", 1.0, 1.0, 2.5, 1.5, 44.0, 1.0, 0, 0};
    p[2] = {"pi-jpeg", 1.0, 1.0, 2.0, 2.0, 20.0, 2.5, 80, 0};
    p[3] = {"pi-smooth", 1.0, 1.0, 3.0, 8.0, 10.0, 7.0, 0, 0};
    return p;
}

PseudoInpainterParams pseudo_inpainter_preset(const std::string& id) {
    for (const auto& p : pseudo_inpainter_presets())
        if (p.id == id) return p;
    throw NotFoundError("no pseudo-inpainter preset named " + id);
}

Image pseudo_inpaint(const Image& image, const Mask& mask,
                     const PseudoInpainterParams& params) {
    const Index h = image.height(), w = image.width();
    if (mask.rows() != h || mask.cols() != w)
        throw std::invalid_argument("mask shape does not match image");

    if (params.outside_strength == 0 && params.inside_strength == 0 &&
        params.jpeg_quality == 0)
        return image;

    Rng rng = make_rng(params.seed, "pseudo-inpaint-" + params.id);
    std::uniform_real_distribution<Scalar> uni(-1.0, 1.0);

    Image out = image;
    if (params.outside_strength > 0) {
        const Image low = resize_bilinear(
            resize_bilinear(image, std::max<Index>(1, h / 2), std::max<Index>(1, w / 2)), h, w);
        const Scalar s = params.outside_strength;
        for (int c = 0; c < 3; ++c) {
            const Scalar shift = uni(rng) * params.colour_shift;
            out.plane(c) = (1 - s) * image.plane(c) + s * (low.plane(c) + shift);
        }
    } else {
        // keep the RNG stream aligned across strength settings
        for (int c = 0; c < 3; ++c) uni(rng);
    }

    if (params.inside_strength > 0 && (mask != 0).any()) {
        const Image context = gaussian_blur(out, params.context_blur_sigma);
        const Scalar s = params.inside_strength;
        for (int c = 0; c < 3; ++c) {
            Plane noise = smooth_noise(h, w, params.noise_scale, rng);
            for (Index y = 0; y < h; ++y)
                for (Index x = 0; x < w; ++x) {
                    if (!mask(y, x)) continue;
                    const Scalar replaced =
                        context.plane(c)(y, x) + params.noise_amp * noise(y, x);
                    out.plane(c)(y, x) = (1 - s) * out.plane(c)(y, x) + s * replaced;
                }
        }
    }

    clamp_planes(out);
    out = quantize(out);
    if (params.jpeg_quality > 0) out = jpeg_roundtrip(out, params.jpeg_quality);
    return out;
}

void SampleGroup::validate() const {
    const Index h = original_image.height(), w = original_image.width();
    if (mask.rows() != h || mask.cols() != w)
        throw ValidationError("group mask shape differs from the original image");
    if (tampered_images.empty()) throw ValidationError("group has no tampered images");
    if (inpainter_ids.size() != tampered_images.size())
        throw ValidationError("inpainter id count differs from tampered image count");
    for (const Image& t : tampered_images)
        if (t.height() != h || t.width() != w)
            throw ValidationError("tampered image shape differs from the original");
    std::set<std::string> unique(inpainter_ids.begin(), inpainter_ids.end());
    if (unique.size() != inpainter_ids.size())
        throw ValidationError("inpainter ids must be distinct");
}

SampleGroup build_sample_group(const Image& image, const Mask& mask, const std::string& caption,
                               const std::vector<PseudoInpainterParams>& inpainters,
                               Scalar p_random, Rng& rng) {
    if (inpainters.empty()) throw std::invalid_argument("at least one inpainter is required");

    SampleGroup group;
    group.original_image = image;
    group.caption = caption;
    group.mask = mask;

    std::uniform_real_distribution<Scalar> uni(0.0, 1.0);
    if (uni(rng) < p_random) {
        const Scalar area = static_cast<Scalar>((mask != 0).count()) /
                            static_cast<Scalar>(mask.size());
        std::uniform_int_distribution<std::uint64_t> seed_draw;
        group.mask = maskgen::random_polygon_mask(image.height(), image.width(), area,
                                                  seed_draw(rng));
    }

    for (const auto& params : inpainters) {
        group.tampered_images.push_back(pseudo_inpaint(image, group.mask, params));
        group.inpainter_ids.push_back(params.id);
    }
    group.validate();
    return group;
}

}  // namespace radar::datagen
