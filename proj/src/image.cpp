#include "radar/image.hpp"

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <jpeglib.h>

#include "radar/errors.hpp"

namespace radar {

namespace {

std::uint8_t clamp_byte(Scalar v) {
    return static_cast<std::uint8_t>(std::clamp<Scalar>(std::round(v), 0.0, 255.0));
}

void write_bytes(std::ofstream& out, const std::vector<std::uint8_t>& bytes) {
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

// Skips whitespace and '#' comments in a PNM header.
int next_header_int(std::istream& in) {
    int c = in.get();
    while (c != EOF && (std::isspace(c) || c == '#')) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        }
        c = in.get();
    }
    if (c == EOF) throw ParseError("truncated PNM header");
    int value = 0;
    while (c != EOF && std::isdigit(c)) {
        value = value * 10 + (c - '0');
        c = in.get();
    }
    return value;
}

}  // namespace

Image quantize(const Image& image) {
    Image out(image.height(), image.width());
    for (int c = 0; c < 3; ++c) {
        out.plane(c) = image.plane(c).unaryExpr(
            [](Scalar v) { return static_cast<Scalar>(clamp_byte(v)); });
    }
    return out;
}

std::uint64_t image_hash(const Image& image) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](std::uint8_t byte) {
        h ^= byte;
        h *= 0x100000001b3ULL;
    };
    for (Index y = 0; y < image.height(); ++y)
        for (Index x = 0; x < image.width(); ++x)
            for (int c = 0; c < 3; ++c) feed(clamp_byte(image.plane(c)(y, x)));
    return h;
}

namespace {

Image read_ppm_stream(std::istream& in, const std::string& what) {
    char p, six;
    in.get(p);
    in.get(six);
    if (!in || p != 'P' || six != '6') throw ParseError("not a P6 PPM: " + what);
    const int w = next_header_int(in);
    const int h = next_header_int(in);
    const int maxval = next_header_int(in);
    if (w <= 0 || h <= 0 || maxval != 255) throw ParseError("unsupported PPM header: " + what);
    Image image(h, w);
    std::vector<std::uint8_t> row(static_cast<std::size_t>(w) * 3);
    for (Index y = 0; y < h; ++y) {
        in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
        if (!in) throw ParseError("truncated PPM data: " + what);
        for (Index x = 0; x < w; ++x) {
            image.r(y, x) = row[3 * x + 0];
            image.g(y, x) = row[3 * x + 1];
            image.b(y, x) = row[3 * x + 2];
        }
    }
    return image;
}

}  // namespace

std::string ppm_bytes(const Image& image) {
    std::string out = "P6\n" + std::to_string(image.width()) + " " +
                      std::to_string(image.height()) + "\n255\n";
    out.reserve(out.size() + static_cast<std::size_t>(image.width()) * image.height() * 3);
    for (Index y = 0; y < image.height(); ++y)
        for (Index x = 0; x < image.width(); ++x) {
            out.push_back(static_cast<char>(clamp_byte(image.r(y, x))));
            out.push_back(static_cast<char>(clamp_byte(image.g(y, x))));
            out.push_back(static_cast<char>(clamp_byte(image.b(y, x))));
        }
    return out;
}

Image parse_ppm_bytes(const std::string& bytes) {
    std::istringstream in(bytes);
    return read_ppm_stream(in, "memory buffer");
}

void write_ppm(const Image& image, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot open for writing: " + path.string());
    const std::string bytes = ppm_bytes(image);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

Image read_ppm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open: " + path.string());
    return read_ppm_stream(in, path.string());
}

namespace {

void write_pgm_bytes(const std::vector<std::uint8_t>& data, Index h, Index w,
                     const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot open for writing: " + path.string());
    out << "P5\n" << w << " " << h << "\n255\n";
    write_bytes(out, data);
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<std::uint8_t> read_pgm_bytes(const std::filesystem::path& path, Index* h, Index* w) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open: " + path.string());
    char p, five;
    in.get(p);
    in.get(five);
    if (p != 'P' || five != '5') throw ParseError("not a P5 PGM: " + path.string());
    const int width = next_header_int(in);
    const int height = next_header_int(in);
    const int maxval = next_header_int(in);
    if (width <= 0 || height <= 0 || maxval != 255)
        throw ParseError("unsupported PGM header: " + path.string());
    std::vector<std::uint8_t> data(static_cast<std::size_t>(width) * height);
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!in) throw ParseError("truncated PGM data: " + path.string());
    *h = height;
    *w = width;
    return data;
}

}  // namespace

void write_mask_pgm(const Mask& mask, const std::filesystem::path& path) {
    std::vector<std::uint8_t> data(static_cast<std::size_t>(mask.rows()) * mask.cols());
    std::size_t i = 0;
    for (Index y = 0; y < mask.rows(); ++y)
        for (Index x = 0; x < mask.cols(); ++x) data[i++] = mask(y, x) ? 255 : 0;
    write_pgm_bytes(data, mask.rows(), mask.cols(), path);
}

Mask read_mask_pgm(const std::filesystem::path& path) {
    Index h = 0, w = 0;
    const auto data = read_pgm_bytes(path, &h, &w);
    Mask mask(h, w);
    std::size_t i = 0;
    for (Index y = 0; y < h; ++y)
        for (Index x = 0; x < w; ++x) mask(y, x) = data[i++] >= 128 ? 1 : 0;
    return mask;
}

std::string mask_pgm_bytes(const Mask& mask) {
    std::string out = "P5\n" + std::to_string(mask.cols()) + " " +
                      std::to_string(mask.rows()) + "\n255\n";
    for (Index y = 0; y < mask.rows(); ++y)
        for (Index x = 0; x < mask.cols(); ++x)
            out.push_back(static_cast<char>(mask(y, x) ? 255 : 0));
    return out;
}

Mask parse_mask_pgm_bytes(const std::string& bytes) {
    std::istringstream in(bytes);
    char p, five;
    in.get(p);
    in.get(five);
    if (!in || p != 'P' || five != '5') throw ParseError("not a P5 PGM: memory buffer");
    const int w = next_header_int(in);
    const int h = next_header_int(in);
    const int maxval = next_header_int(in);
    if (w <= 0 || h <= 0 || maxval != 255)
        throw ParseError("unsupported PGM header: memory buffer");
    Mask mask(h, w);
    std::vector<char> data(static_cast<std::size_t>(w) * h);
    in.read(data.data(), static_cast<std::streamsize>(data.size()));
    if (!in) throw ParseError("truncated PGM data: memory buffer");
    std::size_t i = 0;
    for (Index y = 0; y < h; ++y)
        for (Index x = 0; x < w; ++x)
            mask(y, x) = static_cast<std::uint8_t>(data[i++]) >= 128 ? 1 : 0;
    return mask;
}

void write_map_pgm(const Plane& probabilities, const std::filesystem::path& path) {
    std::vector<std::uint8_t> data(
        static_cast<std::size_t>(probabilities.rows()) * probabilities.cols());
    std::size_t i = 0;
    for (Index y = 0; y < probabilities.rows(); ++y)
        for (Index x = 0; x < probabilities.cols(); ++x)
            data[i++] = clamp_byte(probabilities(y, x) * 255.0);
    write_pgm_bytes(data, probabilities.rows(), probabilities.cols(), path);
}

void write_map_raw(const Plane& probabilities, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot open for writing: " + path.string());
    out.write("RADARMAP", 8);
    const std::uint32_t h = static_cast<std::uint32_t>(probabilities.rows());
    const std::uint32_t w = static_cast<std::uint32_t>(probabilities.cols());
    out.write(reinterpret_cast<const char*>(&h), 4);
    out.write(reinterpret_cast<const char*>(&w), 4);
    for (Index y = 0; y < probabilities.rows(); ++y)
        out.write(reinterpret_cast<const char*>(probabilities.row(y).data()),
                  static_cast<std::streamsize>(sizeof(Scalar) * probabilities.cols()));
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

Plane read_map_raw(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open: " + path.string());
    char magic[8];
    in.read(magic, 8);
    if (!in || std::string(magic, 8) != "RADARMAP")
        throw ParseError("bad raw map header: " + path.string());
    std::uint32_t h = 0, w = 0;
    in.read(reinterpret_cast<char*>(&h), 4);
    in.read(reinterpret_cast<char*>(&w), 4);
    if (!in || h == 0 || w == 0) throw ParseError("bad raw map dims: " + path.string());
    Plane map(h, w);
    for (std::uint32_t y = 0; y < h; ++y)
        in.read(reinterpret_cast<char*>(map.row(y).data()),
                static_cast<std::streamsize>(sizeof(Scalar) * w));
    if (!in) throw ParseError("truncated raw map: " + path.string());
    return map;
}

Plane resize_bilinear(const Plane& src, Index out_h, Index out_w) {
    if (out_h <= 0 || out_w <= 0) throw std::invalid_argument("resize target must be positive");
    if (src.rows() == out_h && src.cols() == out_w) return src;
    Plane dst(out_h, out_w);
    const Scalar sy = static_cast<Scalar>(src.rows()) / static_cast<Scalar>(out_h);
    const Scalar sx = static_cast<Scalar>(src.cols()) / static_cast<Scalar>(out_w);
    for (Index y = 0; y < out_h; ++y) {
        const Scalar fy = std::clamp<Scalar>((y + 0.5) * sy - 0.5, 0.0, src.rows() - 1.0);
        const Index y0 = static_cast<Index>(std::floor(fy));
        const Index y1 = std::min(y0 + 1, src.rows() - 1);
        const Scalar wy = fy - y0;
        for (Index x = 0; x < out_w; ++x) {
            const Scalar fx = std::clamp<Scalar>((x + 0.5) * sx - 0.5, 0.0, src.cols() - 1.0);
            const Index x0 = static_cast<Index>(std::floor(fx));
            const Index x1 = std::min(x0 + 1, src.cols() - 1);
            const Scalar wx = fx - x0;
            dst(y, x) = (1 - wy) * ((1 - wx) * src(y0, x0) + wx * src(y0, x1)) +
                        wy * ((1 - wx) * src(y1, x0) + wx * src(y1, x1));
        }
    }
    return dst;
}

Image resize_bilinear(const Image& src, Index out_h, Index out_w) {
    Image out;
    out.r = resize_bilinear(src.r, out_h, out_w);
    out.g = resize_bilinear(src.g, out_h, out_w);
    out.b = resize_bilinear(src.b, out_h, out_w);
    return out;
}

Mask resize_nearest(const Mask& src, Index out_h, Index out_w) {
    if (src.rows() == 0 || src.cols() == 0 || out_h <= 0 || out_w <= 0)
        throw std::invalid_argument("resize_nearest: empty input or non-positive output size");
    if (src.rows() == out_h && src.cols() == out_w) return src;
    Mask out(out_h, out_w);
    const Scalar sy = static_cast<Scalar>(src.rows()) / static_cast<Scalar>(out_h);
    const Scalar sx = static_cast<Scalar>(src.cols()) / static_cast<Scalar>(out_w);
    for (Index y = 0; y < out_h; ++y) {
        const Index iy = std::min<Index>(src.rows() - 1,
                                         static_cast<Index>((static_cast<Scalar>(y) + 0.5) * sy));
        for (Index x = 0; x < out_w; ++x) {
            const Index ix = std::min<Index>(
                src.cols() - 1, static_cast<Index>((static_cast<Scalar>(x) + 0.5) * sx));
            out(y, x) = src(iy, ix);
        }
    }
    return out;
}

Plane gaussian_blur(const Plane& src, Scalar sigma) {
    if (sigma <= 0) return src;
    const Index radius = static_cast<Index>(std::ceil(3.0 * sigma));
    Vector kernel(2 * radius + 1);
    for (Index i = -radius; i <= radius; ++i)
        kernel(i + radius) = std::exp(-0.5 * (i * i) / (sigma * sigma));
    kernel /= kernel.sum();

    const Index h = src.rows(), w = src.cols();
    Plane tmp(h, w), dst(h, w);
    for (Index y = 0; y < h; ++y)
        for (Index x = 0; x < w; ++x) {
            Scalar acc = 0;
            for (Index k = -radius; k <= radius; ++k)
                acc += kernel(k + radius) * src(y, std::clamp<Index>(x + k, 0, w - 1));
            tmp(y, x) = acc;
        }
    for (Index y = 0; y < h; ++y)
        for (Index x = 0; x < w; ++x) {
            Scalar acc = 0;
            for (Index k = -radius; k <= radius; ++k)
                acc += kernel(k + radius) * tmp(std::clamp<Index>(y + k, 0, h - 1), x);
            dst(y, x) = acc;
        }
    return dst;
}

Image gaussian_blur(const Image& src, Scalar sigma) {
    Image out;
    out.r = gaussian_blur(src.r, sigma);
    out.g = gaussian_blur(src.g, sigma);
    out.b = gaussian_blur(src.b, sigma);
    return out;
}

namespace {

struct JpegErrorMgr {
    jpeg_error_mgr pub;
    std::jmp_buf jump;
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* mgr = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
    std::longjmp(mgr->jump, 1);
}

}  // namespace

std::vector<std::uint8_t> jpeg_encode(const Image& image, int quality) {
    if (quality < 1 || quality > 100) throw std::invalid_argument("jpeg quality out of range");
    jpeg_compress_struct cinfo;
    JpegErrorMgr err;
    cinfo.err = jpeg_std_error(&err.pub);
    err.pub.error_exit = jpeg_error_exit;

    unsigned char* buffer = nullptr;
    unsigned long buffer_size = 0;
    if (setjmp(err.jump)) {
        jpeg_destroy_compress(&cinfo);
        if (buffer) free(buffer);
        throw std::runtime_error("jpeg encode failed");
    }
    jpeg_create_compress(&cinfo);
    jpeg_mem_dest(&cinfo, &buffer, &buffer_size);

    cinfo.image_width = static_cast<JDIMENSION>(image.width());
    cinfo.image_height = static_cast<JDIMENSION>(image.height());
    cinfo.input_components = 3;
    cinfo.in_color_space = JCS_RGB;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, quality, TRUE);
    jpeg_start_compress(&cinfo, TRUE);

    std::vector<std::uint8_t> row(static_cast<std::size_t>(image.width()) * 3);
    while (cinfo.next_scanline < cinfo.image_height) {
        const Index y = cinfo.next_scanline;
        for (Index x = 0; x < image.width(); ++x) {
            row[3 * x + 0] = clamp_byte(image.r(y, x));
            row[3 * x + 1] = clamp_byte(image.g(y, x));
            row[3 * x + 2] = clamp_byte(image.b(y, x));
        }
        JSAMPROW rows[1] = {row.data()};
        jpeg_write_scanlines(&cinfo, rows, 1);
    }
    jpeg_finish_compress(&cinfo);
    std::vector<std::uint8_t> out(buffer, buffer + buffer_size);
    jpeg_destroy_compress(&cinfo);
    free(buffer);
    return out;
}

Image jpeg_decode(const std::vector<std::uint8_t>& bytes) {
    jpeg_decompress_struct cinfo;
    JpegErrorMgr err;
    cinfo.err = jpeg_std_error(&err.pub);
    err.pub.error_exit = jpeg_error_exit;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw ParseError("jpeg decode failed");
    }
    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);

    Image image(cinfo.output_height, cinfo.output_width);
    std::vector<std::uint8_t> row(static_cast<std::size_t>(cinfo.output_width) * 3);
    while (cinfo.output_scanline < cinfo.output_height) {
        const Index y = cinfo.output_scanline;
        JSAMPROW rows[1] = {row.data()};
        jpeg_read_scanlines(&cinfo, rows, 1);
        for (Index x = 0; x < image.width(); ++x) {
            image.r(y, x) = row[3 * x + 0];
            image.g(y, x) = row[3 * x + 1];
            image.b(y, x) = row[3 * x + 2];
        }
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return image;
}

Image jpeg_roundtrip(const Image& image, int quality) {
    return jpeg_decode(jpeg_encode(image, quality));
}

}  // namespace radar
