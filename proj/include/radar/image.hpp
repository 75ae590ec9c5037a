#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "radar/types.hpp"

namespace radar {

// RGB image with channel planes holding values in [0, 255].
// Pipeline stages that persist images quantise first so that the in-memory
// image and the file round-trip bit-exactly.
struct Image {
    Plane r, g, b;

    Image() = default;
    Image(Index height, Index width)
        : r(Plane::Zero(height, width)),
          g(Plane::Zero(height, width)),
          b(Plane::Zero(height, width)) {}

    Index height() const { return r.rows(); }
    Index width() const { return r.cols(); }

    Plane& plane(int c) { return c == 0 ? r : (c == 1 ? g : b); }
    const Plane& plane(int c) const { return c == 0 ? r : (c == 1 ? g : b); }

    // Luminance plane (BT.601 weights).
    Plane grayscale() const { return 0.299 * r + 0.587 * g + 0.114 * b; }
};

// Rounds every value to the nearest integer in [0, 255].
Image quantize(const Image& image);

// Content hash of the quantised pixel data (FNV-1a); drives deterministic stubs.
std::uint64_t image_hash(const Image& image);

// --- Lossless file formats -------------------------------------------------
// RGB images are stored as binary PPM (P6), masks and tamper maps as binary
// PGM (P5). Masks are written with values {0, 255} and read back to {0, 1}.

void write_ppm(const Image& image, const std::filesystem::path& path);
Image read_ppm(const std::filesystem::path& path);

void write_mask_pgm(const Mask& mask, const std::filesystem::path& path);
Mask read_mask_pgm(const std::filesystem::path& path);

// In-memory variants of the same formats (HTTP payloads, tests).
std::string ppm_bytes(const Image& image);
Image parse_ppm_bytes(const std::string& bytes);
std::string mask_pgm_bytes(const Mask& mask);
Mask parse_mask_pgm_bytes(const std::string& bytes);

void write_map_pgm(const Plane& probabilities, const std::filesystem::path& path);

// Raw export: magic "RADARMAP", uint32 height, uint32 width, then row-major
// little-endian doubles.
void write_map_raw(const Plane& probabilities, const std::filesystem::path& path);
Plane read_map_raw(const std::filesystem::path& path);

// --- Geometry --------------------------------------------------------------

// Bilinear resample with half-pixel centre alignment.
Plane resize_bilinear(const Plane& src, Index out_h, Index out_w);
Image resize_bilinear(const Image& src, Index out_h, Index out_w);

// Nearest-neighbour resample for label masks; preserves the {0, 1} domain.
Mask resize_nearest(const Mask& src, Index out_h, Index out_w);

// Separable Gaussian filter; kernel radius ceil(3*sigma), edge-clamped.
Plane gaussian_blur(const Plane& src, Scalar sigma);
Image gaussian_blur(const Image& src, Scalar sigma);

// --- JPEG ------------------------------------------------------------------

std::vector<std::uint8_t> jpeg_encode(const Image& image, int quality);
Image jpeg_decode(const std::vector<std::uint8_t>& bytes);

// Quality in [1, 100]; encode/decode round trip at that quality.
Image jpeg_roundtrip(const Image& image, int quality);

}  // namespace radar
