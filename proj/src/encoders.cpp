#include "radar/encoders.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "radar/errors.hpp"

namespace radar::encoders {

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void hash_bytes(std::uint64_t& h, const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= kFnvPrime;
    }
}

void hash_values(std::uint64_t& h, const Scalar* data, Index count) {
    hash_bytes(h, data, static_cast<std::size_t>(count) * sizeof(Scalar));
}

// Central-difference gradients and Laplacian of the [0,1] grayscale plane,
// replicated at the borders.
void gradient_planes(const Plane& gray, Plane& gx, Plane& gy, Plane& lap) {
    const Index h = gray.rows(), w = gray.cols();
    gx.resize(h, w);
    gy.resize(h, w);
    lap.resize(h, w);
    auto at = [&](Index y, Index x) {
        return gray(std::clamp<Index>(y, 0, h - 1), std::clamp<Index>(x, 0, w - 1));
    };
    for (Index y = 0; y < h; ++y)
        for (Index x = 0; x < w; ++x) {
            gx(y, x) = 0.5 * (at(y, x + 1) - at(y, x - 1));
            gy(y, x) = 0.5 * (at(y + 1, x) - at(y - 1, x));
            lap(y, x) = at(y - 1, x) + at(y + 1, x) + at(y, x - 1) + at(y, x + 1) -
                        4.0 * at(y, x);
        }
}

Scalar patch_gradient_energy(const Plane& gx, const Plane& gy, Index y0, Index y1, Index x0,
                             Index x1) {
    Scalar acc = 0;
    for (Index y = y0; y < y1; ++y)
        for (Index x = x0; x < x1; ++x) acc += gx(y, x) * gx(y, x) + gy(y, x) * gy(y, x);
    return acc / static_cast<Scalar>((y1 - y0) * (x1 - x0));
}

}  // namespace

BackendKind backend_kind_from_string(const std::string& s) {
    if (s == "pretrained-adapter") return BackendKind::PretrainedAdapter;
    if (s == "toy-transformer") return BackendKind::ToyTransformer;
    if (s == "handcrafted") return BackendKind::Handcrafted;
    throw ConfigurationError("unknown encoder backend: " + s);
}

std::string to_string(BackendKind kind) {
    switch (kind) {
        case BackendKind::PretrainedAdapter: return "pretrained-adapter";
        case BackendKind::ToyTransformer: return "toy-transformer";
        case BackendKind::Handcrafted: return "handcrafted";
    }
    throw ConfigurationError("invalid encoder backend value");
}

Matrix semantic_descriptors(const Image& image, const PatchGrid& grid) {
    Matrix out(grid.count(), kSemanticDescriptorDim);
    for (Index p = 0; p < grid.count(); ++p) {
        Index y0, y1, x0, x1;
        grid.patch_bounds(p, &y0, &y1, &x0, &x1);
        const Scalar npix = static_cast<Scalar>((y1 - y0) * (x1 - x0));
        Vector d = Vector::Zero(kSemanticDescriptorDim);
        for (int c = 0; c < 3; ++c) {
            const Plane& plane = image.plane(c);
            Scalar sum = 0, sq = 0;
            for (Index y = y0; y < y1; ++y)
                for (Index x = x0; x < x1; ++x) {
                    const Scalar v = plane(y, x);
                    const int bin = std::min(3, static_cast<int>(v / 64.0));
                    d(c * 4 + bin) += 1.0;
                    sum += v;
                    sq += v * v;
                }
            const Scalar mean = sum / npix;
            const Scalar var = std::max<Scalar>(0.0, sq / npix - mean * mean);
            d.segment(c * 4, 4) /= npix;
            d(12 + c * 2) = mean / 255.0;
            d(12 + c * 2 + 1) = std::sqrt(var) / 255.0;
        }
        out.row(p) = d.transpose();
    }
    return out;
}

Matrix geometry_descriptors(const Image& image, const PatchGrid& grid) {
    const Plane gray = image.grayscale() / 255.0;
    Plane gx, gy, lap;
    gradient_planes(gray, gx, gy, lap);
    Plane g1x, g1y, g2x, g2y, unused;
    gradient_planes(gaussian_blur(gray, 1.0), g1x, g1y, unused);
    gradient_planes(gaussian_blur(gray, 2.0), g2x, g2y, unused);

    Matrix out(grid.count(), kGeometryDescriptorDim);
    for (Index p = 0; p < grid.count(); ++p) {
        Index y0, y1, x0, x1;
        grid.patch_bounds(p, &y0, &y1, &x0, &x1);
        const Scalar npix = static_cast<Scalar>((y1 - y0) * (x1 - x0));
        Vector d = Vector::Zero(kGeometryDescriptorDim);
        d(0) = patch_gradient_energy(gx, gy, y0, y1, x0, x1);
        Scalar lap_acc = 0, mag_total = 0;
        Vector orient = Vector::Zero(4);
        for (Index y = y0; y < y1; ++y)
            for (Index x = x0; x < x1; ++x) {
                lap_acc += std::abs(lap(y, x));
                const Scalar mag = std::hypot(gx(y, x), gy(y, x));
                if (mag > 0) {
                    Scalar ang = std::atan2(gy(y, x), gx(y, x));
                    if (ang < 0) ang += 3.14159265358979323846;
                    int bin = std::min(3, static_cast<int>(ang / (3.14159265358979323846 / 4)));
                    orient(bin) += mag;
                    mag_total += mag;
                }
            }
        d(1) = lap_acc / npix;
        d(2) = patch_gradient_energy(g1x, g1y, y0, y1, x0, x1);
        d(3) = patch_gradient_energy(g2x, g2y, y0, y1, x0, x1);
        if (mag_total > 0) d.segment(4, 4) = orient / mag_total;
        out.row(p) = d.transpose();
    }
    return out;
}

Matrix sinusoidal_positions(Index count, Index dim) {
    Matrix pos(count, dim);
    for (Index p = 0; p < count; ++p)
        for (Index i = 0; i < dim; ++i) {
            const Scalar freq =
                std::pow(10000.0, -static_cast<Scalar>(2 * (i / 2)) / static_cast<Scalar>(dim));
            pos(p, i) = (i % 2 == 0) ? std::sin(p * freq) : std::cos(p * freq);
        }
    return pos;
}

Encoder::Encoder(const EncoderBackendSpec& spec) : spec_(spec) {
    if (spec_.patch_size <= 0 || spec_.feature_dim <= 0 || spec_.input_size <= 0)
        throw ConfigurationError("encoder dimensions must be positive");
    if (spec_.modality == Modality::Fused)
        throw ConfigurationError("encoders produce semantic or geometry features only");

    const char* tag = spec_.modality == Modality::Semantic ? "semantic" : "geometry";
    switch (spec_.kind) {
        case BackendKind::Handcrafted: {
            const Index raw = spec_.modality == Modality::Semantic ? kSemanticDescriptorDim
                                                                   : kGeometryDescriptorDim;
            Rng rng = make_rng(spec_.seed, std::string("handcrafted-") + tag);
            proj_ = nn::xavier_normal(raw, spec_.feature_dim, rng);
            break;
        }
        case BackendKind::ToyTransformer: {
            if (spec_.input_size % spec_.patch_size != 0)
                throw ConfigurationError("input_size must be a multiple of patch_size");
            if (spec_.feature_dim % 4 != 0)
                throw ConfigurationError("toy transformer needs feature_dim divisible by 4");
            Rng rng = make_rng(spec_.seed, std::string("toy-") + tag);
            toy_ = std::make_unique<Toy>();
            const Index raw = spec_.modality == Modality::Semantic ? kSemanticDescriptorDim
                                                                   : kGeometryDescriptorDim;
            toy_->embed.init(raw, spec_.feature_dim, rng);
            for (auto& blk : toy_->blocks) {
                blk.ln1.init(spec_.feature_dim);
                blk.attn.init(spec_.feature_dim, 4, rng);
                blk.ln2.init(spec_.feature_dim);
                blk.mlp.init(spec_.feature_dim, 2 * spec_.feature_dim, spec_.feature_dim, rng);
                // residual branches start small so the frozen stack stays
                // close to identity and keeps per-patch statistics intact
                blk.attn.proj_o.W *= 0.25;
                blk.mlp.fc2.W *= 0.25;
            }
            toy_->ln_final.init(spec_.feature_dim);
            const Index side = spec_.input_size / spec_.patch_size;
            toy_->pos = 0.25 * sinusoidal_positions(side * side, spec_.feature_dim);
            break;
        }
        case BackendKind::PretrainedAdapter: {
            if (spec_.weights_ref.empty())
                throw ConfigurationError("pretrained-adapter backend requires weights_ref");
            std::ifstream in(spec_.weights_ref, std::ios::binary);
            if (!in)
                throw ConfigurationError("cannot open adapter bundle: " + spec_.weights_ref);
            nlohmann::json j;
            try {
                in >> j;
            } catch (const nlohmann::json::exception& e) {
                throw ParseError(std::string("adapter bundle is not valid JSON: ") + e.what());
            }
            try {
                if (j.at("format").get<std::string>() != "radar-patch-probe-v1")
                    throw ParseError("unsupported adapter bundle format");
                spec_.patch_size = j.at("patch_size").get<Index>();
                spec_.feature_dim = j.at("feature_dim").get<Index>();
                spec_.input_size = j.at("input_size").get<Index>();
                const Index raw = spec_.patch_size * spec_.patch_size * 3;
                const auto weights = j.at("weights").get<std::vector<Scalar>>();
                const auto bias = j.at("bias").get<std::vector<Scalar>>();
                if (static_cast<Index>(weights.size()) != raw * spec_.feature_dim ||
                    static_cast<Index>(bias.size()) != spec_.feature_dim)
                    throw ParseError("adapter bundle weight shapes are inconsistent");
                adapter_w_.resize(raw, spec_.feature_dim);
                for (Index i = 0; i < raw; ++i)
                    for (Index k = 0; k < spec_.feature_dim; ++k)
                        adapter_w_(i, k) =
                            weights[static_cast<std::size_t>(i * spec_.feature_dim + k)];
                adapter_b_ =
                    Eigen::Map<const Vector>(bias.data(), static_cast<Index>(bias.size()));
                if (spec_.input_size % spec_.patch_size != 0)
                    throw ParseError("adapter input_size must be a multiple of patch_size");
            } catch (const nlohmann::json::exception& e) {
                throw ParseError(std::string("adapter bundle missing fields: ") + e.what());
            }
            break;
        }
    }
}

Matrix Encoder::raw_patches(const Image& resized, const PatchGrid& grid) const {
    const Index ps = spec_.patch_size;
    const Index raw = ps * ps * 3;
    Matrix out(grid.count(), raw);

    const Plane c0 = resized.r / 255.0;
    const Plane c1 = resized.g / 255.0;
    const Plane c2 = resized.b / 255.0;

    for (Index p = 0; p < grid.count(); ++p) {
        Index y0, y1, x0, x1;
        grid.patch_bounds(p, &y0, &y1, &x0, &x1);
        Index i = 0;
        for (Index y = y0; y < y1; ++y)
            for (Index x = x0; x < x1; ++x) {
                out(p, i++) = c0(y, x);
                out(p, i++) = c1(y, x);
                out(p, i++) = c2(y, x);
            }
    }
    return out;
}

FeatureSequence Encoder::encode(const Image& image) const {
    if (image.height() <= 0 || image.width() <= 0)
        throw std::invalid_argument("cannot encode an empty image");
    const Image resized = resize_bilinear(image, spec_.input_size, spec_.input_size);
    const PatchGrid grid =
        build_patch_grid(spec_.input_size, spec_.input_size, spec_.patch_size);

    FeatureSequence seq;
    seq.grid = grid;
    seq.modality = spec_.modality;

    switch (spec_.kind) {
        case BackendKind::Handcrafted: {
            const Matrix desc = spec_.modality == Modality::Semantic
                                    ? semantic_descriptors(resized, grid)
                                    : geometry_descriptors(resized, grid);
            seq.features = desc * proj_;
            break;
        }
        case BackendKind::ToyTransformer: {
            const Matrix desc = spec_.modality == Modality::Semantic
                                    ? semantic_descriptors(resized, grid)
                                    : geometry_descriptors(resized, grid);
            Matrix x = toy_->embed.forward(desc) + toy_->pos;
            for (const auto& blk : toy_->blocks) {
                Matrix n1 = blk.ln1.forward(x, nullptr);
                x += blk.attn.forward(n1, n1, n1, nullptr);
                Matrix n2 = blk.ln2.forward(x, nullptr);
                x += blk.mlp.forward(n2, nullptr);
            }
            seq.features = toy_->ln_final.forward(x, nullptr);
            break;
        }
        case BackendKind::PretrainedAdapter: {
            seq.features =
                (raw_patches(resized, grid) * adapter_w_).rowwise() + adapter_b_.transpose();
            break;
        }
    }
    seq.validate();
    return seq;
}

std::uint64_t Encoder::checksum() const {
    std::uint64_t h = kFnvOffset;
    hash_bytes(h, &spec_.kind, sizeof(spec_.kind));
    switch (spec_.kind) {
        case BackendKind::Handcrafted: hash_values(h, proj_.data(), proj_.size()); break;
        case BackendKind::ToyTransformer: {
            hash_values(h, toy_->embed.W.data(), toy_->embed.W.size());
            hash_values(h, toy_->embed.b.data(), toy_->embed.b.size());
            for (const auto& blk : toy_->blocks) {
                hash_values(h, blk.ln1.gamma.data(), blk.ln1.gamma.size());
                hash_values(h, blk.ln1.beta.data(), blk.ln1.beta.size());
                for (const nn::Linear* lin :
                     {&blk.attn.proj_q, &blk.attn.proj_k, &blk.attn.proj_v, &blk.attn.proj_o}) {
                    hash_values(h, lin->W.data(), lin->W.size());
                    hash_values(h, lin->b.data(), lin->b.size());
                }
                hash_values(h, blk.ln2.gamma.data(), blk.ln2.gamma.size());
                hash_values(h, blk.ln2.beta.data(), blk.ln2.beta.size());
                for (const nn::Linear* lin : {&blk.mlp.fc1, &blk.mlp.fc2}) {
                    hash_values(h, lin->W.data(), lin->W.size());
                    hash_values(h, lin->b.data(), lin->b.size());
                }
            }
            hash_values(h, toy_->ln_final.gamma.data(), toy_->ln_final.gamma.size());
            hash_values(h, toy_->ln_final.beta.data(), toy_->ln_final.beta.size());
            break;
        }
        case BackendKind::PretrainedAdapter:
            hash_values(h, adapter_w_.data(), adapter_w_.size());
            hash_values(h, adapter_b_.data(), adapter_b_.size());
            break;
    }
    return h;
}

std::shared_ptr<Encoder> EncoderRegistry::register_backend(const std::string& name,
                                                           const EncoderBackendSpec& spec) {
    if (backends_.count(name))
        throw std::invalid_argument("encoder backend already registered: " + name);
    auto enc = std::make_shared<Encoder>(spec);
    backends_[name] = enc;
    return enc;
}

std::shared_ptr<Encoder> EncoderRegistry::get(const std::string& name) const {
    auto it = backends_.find(name);
    if (it == backends_.end()) throw NotFoundError("no encoder backend named " + name);
    return it->second;
}

std::vector<std::string> EncoderRegistry::names() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : backends_) out.push_back(name);
    return out;
}

std::uint64_t pair_checksum(const Encoder& semantic, const Encoder& geometry) {
    std::uint64_t h = kFnvOffset;
    const std::uint64_t a = semantic.checksum(), b = geometry.checksum();
    hash_bytes(h, &a, sizeof(a));
    hash_bytes(h, &b, sizeof(b));
    return h;
}

}  // namespace radar::encoders
