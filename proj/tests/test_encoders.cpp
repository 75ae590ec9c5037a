#include <doctest.h>

#include <fstream>

#include <nlohmann/json.hpp>

#include "radar/encoders.hpp"
#include "radar/errors.hpp"
#include "radar/synth.hpp"

namespace fs = std::filesystem;
using namespace radar;
using namespace radar::encoders;

namespace {

EncoderBackendSpec toy_spec(Modality modality, std::uint64_t seed) {
    EncoderBackendSpec spec;
    spec.kind = BackendKind::ToyTransformer;
    spec.modality = modality;
    spec.patch_size = 16;
    spec.feature_dim = 32;
    spec.input_size = 64;
    spec.seed = seed;
    return spec;
}

Image constant_image(Index h, Index w, Scalar r, Scalar g, Scalar b) {
    Image img(h, w);
    img.r.setConstant(r);
    img.g.setConstant(g);
    img.b.setConstant(b);
    return img;
}

Image vertical_edge_image(Index size) {
    Image img(size, size);
    for (Index y = 0; y < size; ++y)
        for (Index x = 0; x < size; ++x) {
            const Scalar v = x < size / 2 ? 30.0 : 220.0;
            img.r(y, x) = img.g(y, x) = img.b(y, x) = v;
        }
    return img;
}

}  // namespace

TEST_CASE("semantic descriptors are identical across patches of a flat image") {
    const Image img = constant_image(64, 64, 120, 80, 40);
    const PatchGrid grid = build_patch_grid(64, 64, 16);
    const Matrix desc = semantic_descriptors(img, grid);
    REQUIRE(desc.rows() == 16);
    for (Index p = 1; p < desc.rows(); ++p)
        CHECK((desc.row(p) - desc.row(0)).cwiseAbs().maxCoeff() == 0);
    // flat patches have zero standard deviation features
    CHECK(desc(0, 13) == 0.0);
    CHECK(desc(0, 15) == 0.0);
    CHECK(desc(0, 17) == 0.0);
}

TEST_CASE("geometry descriptors flag the edge column of a split image") {
    const Index size = 64;
    const Image img = vertical_edge_image(size);
    const PatchGrid grid = build_patch_grid(size, size, 16);
    const Matrix desc = geometry_descriptors(img, grid);
    // the edge runs down grid column 1/2 boundary: x = 32 sits in column 2
    for (Index row = 0; row < 4; ++row) {
        const Scalar edge_energy = desc(row * 4 + 2, 0);
        const Scalar flat_left = desc(row * 4 + 0, 0);
        const Scalar flat_right = desc(row * 4 + 3, 0);
        CHECK(edge_energy > flat_left);
        CHECK(edge_energy > flat_right);
    }
}

TEST_CASE("handcrafted encoders are deterministic and modality-distinct") {
    EncoderBackendSpec sem;
    sem.kind = BackendKind::Handcrafted;
    sem.modality = Modality::Semantic;
    sem.patch_size = 16;
    sem.feature_dim = 24;
    sem.input_size = 64;
    sem.seed = 5;
    EncoderBackendSpec geo = sem;
    geo.modality = Modality::Geometry;

    const Encoder enc_s(sem), enc_g(geo);
    const Image img = synth::generate_base_image(64, 64, 31);
    const FeatureSequence a = enc_s.encode(img);
    const FeatureSequence b = enc_s.encode(img);
    CHECK((a.features - b.features).cwiseAbs().maxCoeff() == 0);
    CHECK(a.modality == Modality::Semantic);

    // average per-patch cosine between the two modalities stays below 0.9
    const FeatureSequence g = enc_g.encode(img);
    Scalar corr = 0;
    for (Index p = 0; p < a.patch_count(); ++p) {
        const Scalar ns = a.features.row(p).norm(), ng = g.features.row(p).norm();
        if (ns > 0 && ng > 0) corr += a.features.row(p).dot(g.features.row(p)) / (ns * ng);
    }
    corr /= static_cast<Scalar>(a.patch_count());
    CHECK(corr < 0.9);
}

TEST_CASE("toy transformer encoding is frozen and seed-sensitive") {
    const Encoder one(toy_spec(Modality::Semantic, 7));
    const Encoder same(toy_spec(Modality::Semantic, 7));
    const Encoder other(toy_spec(Modality::Semantic, 8));
    const Image img = synth::generate_base_image(64, 64, 11);

    const Matrix f1 = one.encode(img).features;
    const Matrix f2 = one.encode(img).features;
    const Matrix f3 = same.encode(img).features;
    const Matrix f4 = other.encode(img).features;
    CHECK((f1 - f2).cwiseAbs().maxCoeff() == 0);
    CHECK((f1 - f3).cwiseAbs().maxCoeff() == 0);
    CHECK((f1 - f4).cwiseAbs().maxCoeff() > 1e-9);
    CHECK(one.checksum() == same.checksum());
    CHECK(one.checksum() != other.checksum());

    // modality changes the descriptor family and therefore the features
    const Encoder geo(toy_spec(Modality::Geometry, 7));
    CHECK(geo.checksum() != one.checksum());
    CHECK(geo.encode(img).features.cols() == 32);
}

TEST_CASE("toy transformer validates its dimensions") {
    EncoderBackendSpec bad = toy_spec(Modality::Semantic, 1);
    bad.feature_dim = 30;  // not divisible by 4 heads
    CHECK_THROWS_AS(Encoder{bad}, ConfigurationError);
    EncoderBackendSpec uneven = toy_spec(Modality::Semantic, 1);
    uneven.input_size = 60;  // not a multiple of 16
    CHECK_THROWS_AS(Encoder{uneven}, ConfigurationError);
}

TEST_CASE("registry rejects duplicates and unknown lookups") {
    EncoderRegistry registry;
    EncoderBackendSpec spec;
    spec.kind = BackendKind::Handcrafted;
    spec.modality = Modality::Semantic;
    spec.input_size = 32;
    spec.patch_size = 16;
    spec.feature_dim = 8;
    registry.register_backend("sem", spec);
    CHECK(registry.get("sem") != nullptr);
    CHECK_THROWS_AS(registry.register_backend("sem", spec), std::invalid_argument);
    CHECK_THROWS_AS(registry.get("missing"), NotFoundError);
}

TEST_CASE("pretrained adapter bundles load or fail with precise errors") {
    EncoderBackendSpec spec;
    spec.kind = BackendKind::PretrainedAdapter;
    spec.modality = Modality::Semantic;
    CHECK_THROWS_AS(Encoder{spec}, ConfigurationError);  // no weights_ref

    const fs::path bad_path = fs::temp_directory_path() / "radar-test-adapter-bad.json";
    {
        std::ofstream out(bad_path);
        out << "{ not json";
    }
    spec.weights_ref = bad_path.string();
    CHECK_THROWS_AS(Encoder{spec}, ParseError);

    const fs::path good_path = fs::temp_directory_path() / "radar-test-adapter.json";
    const Index ps = 4, dim = 6, input = 8;
    const Index raw = ps * ps * 3;
    nlohmann::json bundle;
    bundle["format"] = "radar-patch-probe-v1";
    bundle["patch_size"] = ps;
    bundle["feature_dim"] = dim;
    bundle["input_size"] = input;
    std::vector<Scalar> weights(static_cast<std::size_t>(raw * dim), 0.0);
    for (Index i = 0; i < dim; ++i)
        weights[static_cast<std::size_t>(i * dim + i)] = 1.0;  // rows 0..5 pick themselves
    bundle["weights"] = weights;
    bundle["bias"] = std::vector<Scalar>{0.5, 0, 0, 0, 0, 0};
    {
        std::ofstream out(good_path);
        out << bundle.dump();
    }
    spec.weights_ref = good_path.string();
    const Encoder adapter(spec);
    const Image img = constant_image(input, input, 255, 0, 0);
    const FeatureSequence seq = adapter.encode(img);
    CHECK(seq.features.rows() == 4);
    CHECK(seq.features.cols() == dim);
    // first raw value is the normalised red channel 1.0; weight row 0 has
    // a single one in column 0 plus the 0.5 bias
    CHECK(seq.features(0, 0) == doctest::Approx(1.5));

    bundle["bias"] = std::vector<Scalar>{1.0};  // wrong length
    {
        std::ofstream out(good_path);
        out << bundle.dump();
    }
    CHECK_THROWS_AS(Encoder{spec}, ParseError);

    fs::remove(bad_path);
    fs::remove(good_path);
}

TEST_CASE("pair checksum changes when either encoder changes") {
    const Encoder s1(toy_spec(Modality::Semantic, 7));
    const Encoder g1(toy_spec(Modality::Geometry, 8));
    const Encoder g2(toy_spec(Modality::Geometry, 9));
    CHECK(pair_checksum(s1, g1) == pair_checksum(s1, g1));
    CHECK(pair_checksum(s1, g1) != pair_checksum(s1, g2));
}

TEST_CASE("feature sequences validate row counts against the grid") {
    FeatureSequence seq;
    seq.grid = build_patch_grid(32, 32, 16);
    seq.features = Matrix::Zero(3, 8);  // grid expects 4 rows
    CHECK_THROWS_AS(seq.validate(), ValidationError);
    seq.features = Matrix::Zero(4, 8);
    CHECK_NOTHROW(seq.validate());
    seq.features(1, 1) = std::numeric_limits<Scalar>::quiet_NaN();
    CHECK_THROWS_AS(seq.validate(), ValidationError);
}
