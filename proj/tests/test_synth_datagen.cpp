#include <doctest.h>

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "radar/datagen.hpp"
#include "radar/errors.hpp"
#include "radar/synth.hpp"
#include "testutil.hpp"

using namespace radar;
using namespace radar::datagen;

namespace {

Mask centre_square_mask(Index h, Index w) {
    Mask mask = Mask::Zero(h, w);
    mask.block(h / 4, w / 4, h / 2, w / 2).setConstant(1);
    return mask;
}

Scalar mean_abs_change(const Image& a, const Image& b, const Mask& mask, std::uint8_t value) {
    Scalar acc = 0;
    Index n = 0;
    for (Index y = 0; y < a.height(); ++y)
        for (Index x = 0; x < a.width(); ++x) {
            if (mask(y, x) != value) continue;
            for (int c = 0; c < 3; ++c)
                acc += std::abs(a.plane(c)(y, x) - b.plane(c)(y, x));
            n += 3;
        }
    return n ? acc / static_cast<Scalar>(n) : 0.0;
}

}  // namespace

TEST_CASE("base image generation is deterministic and quantised") {
    const Image a = synth::generate_base_image(48, 64, 77);
    const Image b = synth::generate_base_image(48, 64, 77);
    const Image c = synth::generate_base_image(48, 64, 78);
    CHECK(a.height() == 48);
    CHECK(a.width() == 64);
    for (int ch = 0; ch < 3; ++ch) {
        CHECK((a.plane(ch) == b.plane(ch)).all());
        CHECK(a.plane(ch).minCoeff() >= 0.0);
        CHECK(a.plane(ch).maxCoeff() <= 255.0);
        CHECK((a.plane(ch) == a.plane(ch).round()).all());
    }
    bool differs = false;
    for (int ch = 0; ch < 3; ++ch) differs = differs || (a.plane(ch) != c.plane(ch)).any();
    CHECK(differs);
}

TEST_CASE("zero-strength pseudo-inpainting is a bit-exact identity") {
    const Image img = synth::generate_base_image(40, 40, 3);
    PseudoInpainterParams params;
    params.outside_strength = 0.0;
    params.inside_strength = 0.0;
    params.jpeg_quality = 0;
    const Image out = pseudo_inpaint(img, centre_square_mask(40, 40), params);
    for (int c = 0; c < 3; ++c) CHECK((out.plane(c) == img.plane(c)).all());
}

TEST_CASE("pseudo-inpainting rewrites the hole and only degrades the context") {
    const Image img = synth::generate_base_image(64, 64, 9);
    const Mask mask = centre_square_mask(64, 64);
    const Image out = pseudo_inpaint(img, mask, pseudo_inpainter_preset("pi-soft"));

    const Scalar inside = mean_abs_change(img, out, mask, 1);
    const Scalar outside = mean_abs_change(img, out, mask, 0);
    CHECK(outside > 0.0);
    CHECK(inside > 4.0 * outside);

    // same params give the same bytes
    const Image again = pseudo_inpaint(img, mask, pseudo_inpainter_preset("pi-soft"));
    for (int c = 0; c < 3; ++c) CHECK((out.plane(c) == again.plane(c)).all());

    CHECK_THROWS_AS(pseudo_inpaint(img, centre_square_mask(32, 32), PseudoInpainterParams{}),
                    std::invalid_argument);
}

TEST_CASE("preset table lists four distinct inpainters") {
    const auto presets = pseudo_inpainter_presets();
    REQUIRE(presets.size() == 4);
    std::set<std::string> ids;
    for (const auto& p : presets) ids.insert(p.id);
    CHECK(ids == std::set<std::string>{"pi-soft", "pi-noisy", "pi-jpeg", "pi-smooth"});
    CHECK(pseudo_inpainter_preset("pi-jpeg").jpeg_quality > 0);
    CHECK_THROWS_AS(pseudo_inpainter_preset("pi-mystery"), NotFoundError);

    // distinct presets produce distinct tampered pixels
    const Image img = synth::generate_base_image(48, 48, 21);
    const Mask mask = centre_square_mask(48, 48);
    const Image soft = pseudo_inpaint(img, mask, pseudo_inpainter_preset("pi-soft"));
    const Image noisy = pseudo_inpaint(img, mask, pseudo_inpainter_preset("pi-noisy"));
    bool differs = false;
    for (int c = 0; c < 3; ++c) differs = differs || (soft.plane(c) != noisy.plane(c)).any();
    CHECK(differs);
}

TEST_CASE("sample groups apply every inpainter to one shared mask") {
    const Image img = synth::generate_base_image(64, 64, 5);
    const Mask mask = centre_square_mask(64, 64);
    auto inpainters = pseudo_inpainter_presets();
    inpainters.resize(2);

    Rng rng = make_rng(40, "group");
    const SampleGroup group = build_sample_group(img, mask, "caption", inpainters, 0.0, rng);
    CHECK(group.k() == 2);
    CHECK(group.inpainter_ids == std::vector<std::string>{"pi-soft", "pi-noisy"});
    CHECK(group.caption == "caption");
    CHECK((group.mask == mask).all());
    CHECK_NOTHROW(group.validate());
    for (Index i = 0; i < group.k(); ++i) {
        const Image direct = pseudo_inpaint(img, mask, inpainters[static_cast<std::size_t>(i)]);
        for (int c = 0; c < 3; ++c)
            CHECK((group.tampered_images[static_cast<std::size_t>(i)].plane(c) ==
                   direct.plane(c)).all());
    }

    Rng rng_a = make_rng(41, "group");
    Rng rng_b = make_rng(41, "group");
    const SampleGroup ga = build_sample_group(img, mask, "c", inpainters, 1.0, rng_a);
    const SampleGroup gb = build_sample_group(img, mask, "c", inpainters, 1.0, rng_b);
    CHECK((ga.mask == gb.mask).all());
    CHECK((ga.mask != mask).any());  // p_random = 1 swaps in a polygon mask
    CHECK((ga.mask != 0).count() > 0);

    Rng rng_c = make_rng(42, "group");
    CHECK_THROWS_AS(build_sample_group(img, mask, "c", {}, 0.0, rng_c), std::invalid_argument);
}

TEST_CASE("sample group validation catches structural mistakes") {
    const Image img = synth::generate_base_image(32, 32, 1);
    SampleGroup group;
    group.original_image = img;
    group.mask = centre_square_mask(32, 32);
    CHECK_THROWS_AS(group.validate(), ValidationError);  // no tampered images

    group.tampered_images.push_back(img);
    group.inpainter_ids = {"a", "b"};
    CHECK_THROWS_AS(group.validate(), ValidationError);  // count mismatch

    group.inpainter_ids = {"a"};
    group.tampered_images.push_back(img);
    group.inpainter_ids.push_back("a");
    CHECK_THROWS_AS(group.validate(), ValidationError);  // duplicate ids

    group.inpainter_ids[1] = "b";
    CHECK_NOTHROW(group.validate());
    group.mask = centre_square_mask(16, 16);
    CHECK_THROWS_AS(group.validate(), ValidationError);  // mask shape
}
