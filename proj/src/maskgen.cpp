#include "radar/maskgen.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "radar/errors.hpp"
#include "radar/rng.hpp"

namespace radar::maskgen {

AreaFilterResult filter_mask_by_area(const Mask& mask) {
    if (mask.size() == 0) throw std::invalid_argument("empty image");
    AreaFilterResult res;
    const auto set = static_cast<Scalar>(mask.cast<std::int64_t>().sum());
    res.area_fraction = set / static_cast<Scalar>(mask.size());
    res.accepted = res.area_fraction >= kMinAreaFraction && res.area_fraction <= kMaxAreaFraction;
    return res;
}

Mask dilate(const Mask& mask) {
    const Index h = mask.rows(), w = mask.cols();
    Mask out = Mask::Zero(h, w);
    for (Index y = 0; y < h; ++y)
        for (Index x = 0; x < w; ++x) {
            if (!mask(y, x)) continue;
            const Index y0 = std::max<Index>(y - 1, 0), y1 = std::min<Index>(y + 1, h - 1);
            const Index x0 = std::max<Index>(x - 1, 0), x1 = std::min<Index>(x + 1, w - 1);
            for (Index yy = y0; yy <= y1; ++yy)
                for (Index xx = x0; xx <= x1; ++xx) out(yy, xx) = 1;
        }
    return out;
}

int count_components(const Mask& mask) {
    const Index h = mask.rows(), w = mask.cols();
    PlaneX<std::uint8_t> seen = PlaneX<std::uint8_t>::Zero(h, w);
    std::vector<std::pair<Index, Index>> stack;
    int components = 0;
    for (Index sy = 0; sy < h; ++sy)
        for (Index sx = 0; sx < w; ++sx) {
            if (!mask(sy, sx) || seen(sy, sx)) continue;
            ++components;
            seen(sy, sx) = 1;
            stack.push_back({sy, sx});
            while (!stack.empty()) {
                auto [y, x] = stack.back();
                stack.pop_back();
                for (Index dy = -1; dy <= 1; ++dy)
                    for (Index dx = -1; dx <= 1; ++dx) {
                        const Index ny = y + dy, nx = x + dx;
                        if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
                        if (mask(ny, nx) && !seen(ny, nx)) {
                            seen(ny, nx) = 1;
                            stack.push_back({ny, nx});
                        }
                    }
            }
        }
    return components;
}

CohesionResult cohere_mask(const Mask& mask) {
    CohesionResult res;
    res.mask = dilate(mask);
    res.dilations_applied = 1;
    while (res.dilations_applied < kMaxDilationRounds &&
           count_components(res.mask) >= kComponentTarget) {
        res.mask = dilate(res.mask);
        ++res.dilations_applied;
    }
    res.components = count_components(res.mask);
    return res;
}

std::pair<Scalar, Scalar> mask_centroid(const Mask& mask) {
    Scalar sy = 0, sx = 0, n = 0;
    for (Index y = 0; y < mask.rows(); ++y)
        for (Index x = 0; x < mask.cols(); ++x)
            if (mask(y, x)) {
                sy += static_cast<Scalar>(y);
                sx += static_cast<Scalar>(x);
                n += 1;
            }
    if (n == 0) return {0, 0};
    return {sy / n, sx / n};
}

namespace {

struct Point {
    Scalar y, x;
};

// Even-odd scanline fill against pixel centres, clipped to the image.
Mask fill_polygon(const std::vector<Point>& poly, Index h, Index w) {
    Mask out = Mask::Zero(h, w);
    const int n = static_cast<int>(poly.size());
    std::vector<Scalar> xs;
    for (Index y = 0; y < h; ++y) {
        const Scalar cy = static_cast<Scalar>(y) + 0.5;
        xs.clear();
        for (int i = 0; i < n; ++i) {
            const Point& a = poly[i];
            const Point& b = poly[(i + 1) % n];
            if ((a.y <= cy && b.y > cy) || (b.y <= cy && a.y > cy)) {
                const Scalar t = (cy - a.y) / (b.y - a.y);
                xs.push_back(a.x + t * (b.x - a.x));
            }
        }
        std::sort(xs.begin(), xs.end());
        for (std::size_t i = 0; i + 1 < xs.size(); i += 2) {
            const Index x0 = std::max<Index>(0, static_cast<Index>(std::ceil(xs[i] - 0.5)));
            const Index x1 = std::min<Index>(w - 1, static_cast<Index>(std::floor(xs[i + 1] - 0.5)));
            for (Index x = x0; x <= x1; ++x) out(y, x) = 1;
        }
    }
    return out;
}

std::vector<Point> draw_angle_sorted_points(Rng& rng, Index h, Index w, int count) {
    std::uniform_real_distribution<Scalar> uy(0.0, static_cast<Scalar>(h));
    std::uniform_real_distribution<Scalar> ux(0.0, static_cast<Scalar>(w));
    std::vector<Point> pts(count);
    for (auto& p : pts) p = {uy(rng), ux(rng)};
    Scalar cy = 0, cx = 0;
    for (const auto& p : pts) {
        cy += p.y;
        cx += p.x;
    }
    cy /= count;
    cx /= count;
    std::sort(pts.begin(), pts.end(), [&](const Point& a, const Point& b) {
        return std::atan2(a.y - cy, a.x - cx) < std::atan2(b.y - cy, b.x - cx);
    });
    return pts;
}

}  // namespace

Mask random_polygon_mask(Index height, Index width, Scalar target_area, std::uint64_t seed) {
    if (height <= 0 || width <= 0) throw std::invalid_argument("mask dimensions must be positive");
    if (target_area <= 0 || target_area >= 1)
        throw std::invalid_argument("target_area must be in (0, 1)");

    Rng rng = make_rng(seed, "polygon");
    const Scalar total = static_cast<Scalar>(height) * static_cast<Scalar>(width);

    // A degenerate vertex draw (near-collinear points, or a fill that splits
    // at the border) is redrawn from the same stream; still seed-deterministic.
    for (int redraw = 0; redraw < 8; ++redraw) {
        std::vector<Point> base = draw_angle_sorted_points(rng, height, width, 8);
        Scalar cy = 0, cx = 0;
        for (const auto& p : base) {
            cy += p.y;
            cx += p.x;
        }
        cy /= 8;
        cx /= 8;

        Scalar scale = 1.0;
        std::vector<Point> scaled(8);
        bool disconnected = false;
        for (int attempt = 0; attempt < kPolygonScaleAttempts; ++attempt) {
            for (int i = 0; i < 8; ++i)
                scaled[i] = {cy + scale * (base[i].y - cy), cx + scale * (base[i].x - cx)};
            Mask mask = fill_polygon(scaled, height, width);
            const Scalar frac = static_cast<Scalar>(mask.cast<std::int64_t>().sum()) / total;
            if (std::abs(frac - target_area) <= kPolygonAreaTolerance) {
                if (count_components(mask) == 1) return mask;
                disconnected = true;  // clipped fill fell apart
                break;
            }
            if (frac <= 0) {
                scale *= 2.0;
                continue;
            }
            scale *= std::sqrt(target_area / frac);
        }
        if (!disconnected)
            throw GenerationError("polygon mask: target area unattainable within tolerance");
    }
    throw GenerationError("polygon mask: degenerate vertex draws exhausted");
}

Scalar sample_area_target(const std::vector<Scalar>& observed_areas, std::uint64_t seed) {
    if (observed_areas.empty()) throw std::invalid_argument("observed_areas is empty");
    Rng rng = make_rng(seed, "area-target");
    std::uniform_int_distribution<std::size_t> pick(0, observed_areas.size() - 1);
    return observed_areas[pick(rng)];
}

}  // namespace radar::maskgen
