#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "radar/feature_sequence.hpp"
#include "radar/image.hpp"
#include "radar/nn.hpp"

namespace radar::encoders {

enum class BackendKind { PretrainedAdapter, ToyTransformer, Handcrafted };

BackendKind backend_kind_from_string(const std::string& s);
std::string to_string(BackendKind kind);

struct EncoderBackendSpec {
    BackendKind kind = BackendKind::Handcrafted;
    Modality modality = Modality::Semantic;  // Semantic or Geometry cue family
    Index patch_size = 16;
    Index feature_dim = 64;
    Index input_size = 224;  // images are resized to input_size x input_size
    std::uint64_t seed = 0;
    std::string weights_ref;  // PretrainedAdapter bundle path
};

// Raw per-patch descriptors before projection, one row per grid patch.
// Semantic rows: 4-bin histogram per channel (12) + per-channel mean and
// standard deviation scaled to [0,1] (6).
inline constexpr Index kSemanticDescriptorDim = 18;
Matrix semantic_descriptors(const Image& image, const PatchGrid& grid);

// Geometry rows: mean gradient energy (component 0), mean absolute Laplacian,
// gradient energy after blur sigma 1 and 2, then a 4-bin gradient orientation
// histogram weighted by magnitude.
inline constexpr Index kGeometryDescriptorDim = 8;
Matrix geometry_descriptors(const Image& image, const PatchGrid& grid);

// Sinusoidal position table, one row per patch index.
Matrix sinusoidal_positions(Index count, Index dim);

// Frozen feature extractor. All parameters are fixed at construction; encode
// never mutates state and is bitwise repeatable.
class Encoder {
public:
    explicit Encoder(const EncoderBackendSpec& spec);

    const EncoderBackendSpec& spec() const { return spec_; }
    FeatureSequence encode(const Image& image) const;

    // FNV-1a over the bit patterns of every parameter, in a fixed order.
    std::uint64_t checksum() const;

private:
    struct ToyBlock {
        nn::LayerNorm ln1;
        nn::MultiHeadAttention attn;
        nn::LayerNorm ln2;
        nn::Mlp mlp;
    };
    struct Toy {
        nn::Linear embed;
        std::array<ToyBlock, 2> blocks;
        nn::LayerNorm ln_final;
        Matrix pos;
    };

    Matrix raw_patches(const Image& resized, const PatchGrid& grid) const;

    EncoderBackendSpec spec_;
    Matrix proj_;   // Handcrafted projection
    std::unique_ptr<Toy> toy_;
    Matrix adapter_w_;
    Vector adapter_b_;
};

class EncoderRegistry {
public:
    std::shared_ptr<Encoder> register_backend(const std::string& name,
                                              const EncoderBackendSpec& spec);
    std::shared_ptr<Encoder> get(const std::string& name) const;
    std::vector<std::string> names() const;

private:
    std::map<std::string, std::shared_ptr<Encoder>> backends_;
};

// Combined checksum of a frozen encoder pair; the training loop asserts this
// stays constant across a run.
std::uint64_t pair_checksum(const Encoder& semantic, const Encoder& geometry);

}  // namespace radar::encoders
