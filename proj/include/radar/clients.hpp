#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "radar/image.hpp"

namespace radar::clients {

struct ObjectProposal {
    std::vector<std::string> names;
    std::string caption;
};

class ProposerClient {
public:
    virtual ~ProposerClient() = default;
    virtual ObjectProposal propose(const Image& image) = 0;
};

class SegmenterClient {
public:
    virtual ~SegmenterClient() = default;
    // Throws invalid-argument for an empty object name, not-found when the
    // backend produces no mask, external-service-error when unreachable.
    virtual Mask segment(const Image& image, const std::string& object_name) = 0;
};

class InpainterClient {
public:
    virtual ~InpainterClient() = default;
    virtual Image inpaint(const Image& image, const Mask& mask, const std::string& caption) = 0;
    virtual std::string id() const = 0;
    // Inputs are downscaled so their longest edge does not exceed this before
    // being sent; outputs are resized back to the original dimensions.
    virtual Index longest_edge() const { return 512; }
};

// Deterministic offline backends used by tests and desk-scale generation.
class StubProposer : public ProposerClient {
public:
    ObjectProposal propose(const Image& image) override;
};

class StubSegmenter : public SegmenterClient {
public:
    explicit StubSegmenter(std::uint64_t seed = 0) : seed_(seed) {}
    // Seeded axis-aligned rectangle covering 5-40% of the image.
    Mask segment(const Image& image, const std::string& object_name) override;

private:
    std::uint64_t seed_;
};

// HTTP backends. Protocol: multipart/form-data POST carrying the image as a
// binary PPM part named "image" (plus "mask" as binary PGM for inpainting)
// and a JSON part named "params". Responses: /propose returns JSON
// {"names": [...], "caption": "..."}; /segment returns a PGM body (404 when
// no mask is found); /inpaint returns a PPM body.
struct HttpClientConfig {
    std::string base_url;  // e.g. http://127.0.0.1:8801
    int timeout_seconds = 30;
};

// Reads the environment override for a client base URL; falls back to the
// supplied default. Variables: RADAR_PROPOSER_URL, RADAR_SEGMENTER_URL,
// RADAR_INPAINTER_URL.
std::string url_from_env(const char* var, const std::string& fallback);

class HttpProposer : public ProposerClient {
public:
    explicit HttpProposer(HttpClientConfig config) : config_(std::move(config)) {}
    ObjectProposal propose(const Image& image) override;

private:
    HttpClientConfig config_;
};

class HttpSegmenter : public SegmenterClient {
public:
    explicit HttpSegmenter(HttpClientConfig config) : config_(std::move(config)) {}
    Mask segment(const Image& image, const std::string& object_name) override;

private:
    HttpClientConfig config_;
};

class HttpInpainter : public InpainterClient {
public:
    HttpInpainter(HttpClientConfig config, std::string id, Index longest_edge = 512)
        : config_(std::move(config)), id_(std::move(id)), longest_edge_(longest_edge) {}
    Image inpaint(const Image& image, const Mask& mask, const std::string& caption) override;
    std::string id() const override { return id_; }
    Index longest_edge() const override { return longest_edge_; }

private:
    HttpClientConfig config_;
    std::string id_;
    Index longest_edge_;
};

}  // namespace radar::clients
