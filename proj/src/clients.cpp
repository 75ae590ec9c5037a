#include "radar/clients.hpp"

#include <cstdlib>
#include <stdexcept>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "radar/errors.hpp"
#include "radar/rng.hpp"

namespace radar::clients {

namespace {

const char* kNouns[] = {"lamp",  "chair",  "bottle", "car",   "plant",
                        "sign",  "window", "table",  "stone", "umbrella"};
constexpr std::size_t kNounCount = sizeof(kNouns) / sizeof(kNouns[0]);

httplib::Client make_http(const HttpClientConfig& config) {
    httplib::Client cli(config.base_url);
    cli.set_connection_timeout(config.timeout_seconds);
    cli.set_read_timeout(config.timeout_seconds);
    cli.set_write_timeout(config.timeout_seconds);
    return cli;
}

[[noreturn]] void fail_http(const std::string& what, const httplib::Result& res) {
    if (!res)
        throw ExternalServiceError(what + ": " + httplib::to_string(res.error()));
    throw ExternalServiceError(what + ": HTTP status " + std::to_string(res->status));
}

}  // namespace

std::string url_from_env(const char* var, const std::string& fallback) {
    const char* value = std::getenv(var);
    return value && *value ? std::string(value) : fallback;
}

ObjectProposal StubProposer::propose(const Image& image) {
    const std::uint64_t h = image_hash(image);
    Rng rng = make_rng(h, "stub-proposer");
    std::uniform_int_distribution<std::size_t> pick(0, kNounCount - 1);
    std::uniform_int_distribution<int> count(1, 3);

    ObjectProposal proposal;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
        std::string noun = kNouns[pick(rng)];
        bool seen = false;
        for (const auto& existing : proposal.names) seen = seen || existing == noun;
        if (!seen) proposal.names.push_back(std::move(noun));
    }
    proposal.caption = "a scene containing";
    for (std::size_t i = 0; i < proposal.names.size(); ++i)
        proposal.caption +=
            (i == 0 ? " " : (i + 1 == proposal.names.size() ? " and " : ", ")) +
            proposal.names[i];
    return proposal;
}

Mask StubSegmenter::segment(const Image& image, const std::string& object_name) {
    if (object_name.empty()) throw std::invalid_argument("object name must be non-empty");
    const Index h = image.height(), w = image.width();
    Rng rng = make_rng(mix_seed(seed_, image_hash(image)), "stub-segmenter-" + object_name);
    std::uniform_real_distribution<Scalar> uni(0.0, 1.0);

    // Pick a rectangle whose area lies in [5%, 40%] of the image.
    const Scalar area_frac = 0.05 + 0.35 * uni(rng);
    const Scalar aspect = 0.5 + 1.5 * uni(rng);
    Scalar rh = std::sqrt(area_frac * static_cast<Scalar>(h) * static_cast<Scalar>(w) * aspect);
    Scalar rw = rh / aspect;
    const Index bh = std::clamp<Index>(static_cast<Index>(rh), 1, h);
    const Index bw = std::clamp<Index>(static_cast<Index>(rw), 1, w);
    const Index y0 = static_cast<Index>(uni(rng) * static_cast<Scalar>(h - bh));
    const Index x0 = static_cast<Index>(uni(rng) * static_cast<Scalar>(w - bw));

    Mask mask = Mask::Zero(h, w);
    for (Index y = y0; y < y0 + bh; ++y)
        for (Index x = x0; x < x0 + bw; ++x) mask(y, x) = 1;
    return mask;
}

ObjectProposal HttpProposer::propose(const Image& image) {
    httplib::Client cli = make_http(config_);
    const httplib::MultipartFormDataItems items = {
        {"image", ppm_bytes(image), "image.ppm", "application/octet-stream"},
        {"params", "{}", "", "application/json"},
    };
    auto res = cli.Post("/propose", items);
    if (!res || res->status != 200) fail_http("proposer request failed", res);
    try {
        const auto j = nlohmann::json::parse(res->body);
        ObjectProposal proposal;
        proposal.names = j.at("names").get<std::vector<std::string>>();
        proposal.caption = j.at("caption").get<std::string>();
        return proposal;
    } catch (const nlohmann::json::exception& e) {
        throw ExternalServiceError(std::string("proposer returned malformed JSON: ") +
                                   e.what());
    }
}

Mask HttpSegmenter::segment(const Image& image, const std::string& object_name) {
    if (object_name.empty()) throw std::invalid_argument("object name must be non-empty");
    httplib::Client cli = make_http(config_);
    const nlohmann::json params = {{"object_name", object_name}};
    const httplib::MultipartFormDataItems items = {
        {"image", ppm_bytes(image), "image.ppm", "application/octet-stream"},
        {"params", params.dump(), "", "application/json"},
    };
    auto res = cli.Post("/segment", items);
    if (res && res->status == 404)
        throw NotFoundError("segmenter found no mask for " + object_name);
    if (!res || res->status != 200) fail_http("segmenter request failed", res);
    try {
        Mask mask = parse_mask_pgm_bytes(res->body);
        if (!(mask != 0).any()) throw NotFoundError("segmenter returned an empty mask");
        return mask;
    } catch (const ParseError& e) {
        throw ExternalServiceError(std::string("segmenter returned a malformed mask: ") +
                                   e.what());
    }
}

Image HttpInpainter::inpaint(const Image& image, const Mask& mask, const std::string& caption) {
    if (mask.rows() != image.height() || mask.cols() != image.width())
        throw std::invalid_argument("mask shape does not match image");

    // Resize-down policy: longest edge capped per client declaration.
    Image send = image;
    Mask send_mask = mask;
    const Index longest = std::max(image.height(), image.width());
    if (longest > longest_edge_) {
        const Scalar scale = static_cast<Scalar>(longest_edge_) / static_cast<Scalar>(longest);
        const Index nh = std::max<Index>(1, static_cast<Index>(image.height() * scale));
        const Index nw = std::max<Index>(1, static_cast<Index>(image.width() * scale));
        send = quantize(resize_bilinear(image, nh, nw));
        send_mask = Mask::Zero(nh, nw);
        for (Index y = 0; y < nh; ++y)
            for (Index x = 0; x < nw; ++x) {
                const Index sy = std::min<Index>(image.height() - 1,
                                                 static_cast<Index>(y / scale));
                const Index sx =
                    std::min<Index>(image.width() - 1, static_cast<Index>(x / scale));
                send_mask(y, x) = mask(sy, sx);
            }
    }

    httplib::Client cli = make_http(config_);
    const nlohmann::json params = {{"caption", caption}, {"inpainter_id", id_}};
    const httplib::MultipartFormDataItems items = {
        {"image", ppm_bytes(send), "image.ppm", "application/octet-stream"},
        {"mask", mask_pgm_bytes(send_mask), "mask.pgm", "application/octet-stream"},
        {"params", params.dump(), "", "application/json"},
    };
    auto res = cli.Post("/inpaint", items);
    if (!res || res->status != 200) fail_http("inpainter request failed", res);
    try {
        Image out = parse_ppm_bytes(res->body);
        if (out.height() != image.height() || out.width() != image.width())
            out = quantize(resize_bilinear(out, image.height(), image.width()));
        return out;
    } catch (const ParseError& e) {
        throw ExternalServiceError(std::string("inpainter returned a malformed image: ") +
                                   e.what());
    }
}

}  // namespace radar::clients
