#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "edgegrid/errors.hpp"
#include "edgegrid/image.hpp"

namespace edgegrid {

/// Binary edge raster, same dimensions as the source frame.
struct EdgeMap {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;  // 0/1, row-major

    EdgeMap() = default;
    EdgeMap(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h, 0) {}

    bool at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool v = true) { data[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }

    std::size_t edge_count() const {
        std::size_t n = 0;
        for (auto v : data) n += v ? 1 : 0;
        return n;
    }

    bool operator==(const EdgeMap&) const = default;
};

/// Detector knobs. threshold_t is the single normalized edge threshold; the
/// hysteresis low threshold is threshold_t * low_ratio.
struct EdgeParams {
    double threshold_t = 0.4;
    double low_ratio = 0.5;
    double gaussian_sigma = 1.4;

    void validate() const {
        if (!(threshold_t > 0.0 && threshold_t < 1.0))
            throw DimensionError("edge threshold must lie in (0,1)");
        if (!(low_ratio > 0.0 && low_ratio <= 1.0))
            throw DimensionError("low_ratio must lie in (0,1]");
        if (!(gaussian_sigma > 0.0)) throw DimensionError("gaussian sigma must be positive");
    }
};

/// Per-pixel gradient magnitude (normalized to [0,1] by the global maximum)
/// and direction from atan2 in (-pi, pi].
struct GradientField {
    int width = 0;
    int height = 0;
    std::vector<float> magnitude;
    std::vector<float> direction;
};

/// Separable Gaussian with kernel radius ceil(3*sigma) and clamp-to-edge
/// borders. Output stays in [0,1].
inline GrayFrame gaussian_blur(const GrayFrame& frame, double sigma) {
    if (!(sigma > 0.0)) throw DimensionError("gaussian sigma must be positive");
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<float> kernel(static_cast<std::size_t>(radius) + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i)
        sum += std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
    for (int i = 0; i <= radius; ++i)
        kernel[static_cast<std::size_t>(i)] =
            static_cast<float>(std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma)) / sum);

    GrayFrame horizontal(frame.width, frame.height);
    for (int y = 0; y < frame.height; ++y)
        for (int x = 0; x < frame.width; ++x) {
            float acc = kernel[0] * frame.at(x, y);
            for (int i = 1; i <= radius; ++i)
                acc += kernel[static_cast<std::size_t>(i)] *
                       (frame.at_clamped(x - i, y) + frame.at_clamped(x + i, y));
            horizontal.at(x, y) = acc;
        }

    GrayFrame out(frame.width, frame.height);
    for (int y = 0; y < frame.height; ++y)
        for (int x = 0; x < frame.width; ++x) {
            float acc = kernel[0] * horizontal.at(x, y);
            for (int i = 1; i <= radius; ++i)
                acc += kernel[static_cast<std::size_t>(i)] *
                       (horizontal.at_clamped(x, y - i) + horizontal.at_clamped(x, y + i));
            out.at(x, y) = std::min(1.0f, std::max(0.0f, acc));
        }
    return out;
}

/// 3x3 Sobel with clamp-to-edge borders.
inline GradientField gradients(const GrayFrame& frame) {
    if (frame.width < 3 || frame.height < 3)
        throw DimensionError("gradients need a frame of at least 3x3");
    GradientField field;
    field.width = frame.width;
    field.height = frame.height;
    field.magnitude.assign(frame.size(), 0.0f);
    field.direction.assign(frame.size(), 0.0f);

    float max_mag = 0.0f;
    for (int y = 0; y < frame.height; ++y)
        for (int x = 0; x < frame.width; ++x) {
            const float tl = frame.at_clamped(x - 1, y - 1), tc = frame.at_clamped(x, y - 1),
                        tr = frame.at_clamped(x + 1, y - 1);
            const float ml = frame.at_clamped(x - 1, y), mr = frame.at_clamped(x + 1, y);
            const float bl = frame.at_clamped(x - 1, y + 1), bc = frame.at_clamped(x, y + 1),
                        br = frame.at_clamped(x + 1, y + 1);
            const float gx = (tr + 2.0f * mr + br) - (tl + 2.0f * ml + bl);
            const float gy = (bl + 2.0f * bc + br) - (tl + 2.0f * tc + tr);
            const float mag = std::sqrt(gx * gx + gy * gy);
            const std::size_t i = static_cast<std::size_t>(y) * frame.width + x;
            field.magnitude[i] = mag;
            field.direction[i] = std::atan2(gy, gx);
            max_mag = std::max(max_mag, mag);
        }
    if (max_mag > 0.0f)
        for (auto& m : field.magnitude) m /= max_mag;
    return field;
}

namespace detail {

// Gradient direction quantized to 4 sectors: 0 = horizontal gradient
// (compare x neighbors), 1 = 45 degrees, 2 = vertical, 3 = 135 degrees.
inline int direction_sector(float direction) {
    const double pi = 3.14159265358979323846;
    double a = std::fmod(static_cast<double>(direction), pi);
    if (a < 0.0) a += pi;
    const int sector = static_cast<int>(std::lround(a / (pi / 4.0)));
    return sector % 4;
}

}  // namespace detail

/// Keeps a pixel iff its magnitude is >= both neighbors along the quantized
/// gradient direction; ties keep the pixel. Border pixels compare only
/// against in-bounds neighbors.
inline std::vector<float> non_max_suppression(const GradientField& field) {
    static constexpr int kOffsets[4][2] = {{1, 0}, {1, 1}, {0, 1}, {-1, 1}};
    std::vector<float> out(field.magnitude.size(), 0.0f);
    for (int y = 0; y < field.height; ++y)
        for (int x = 0; x < field.width; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * field.width + x;
            const float m = field.magnitude[i];
            if (m == 0.0f) continue;
            const int sector = detail::direction_sector(field.direction[i]);
            const int dx = kOffsets[sector][0], dy = kOffsets[sector][1];
            bool keep = true;
            for (int side = -1; side <= 1; side += 2) {
                const int nx = x + side * dx, ny = y + side * dy;
                if (nx < 0 || nx >= field.width || ny < 0 || ny >= field.height) continue;
                if (m < field.magnitude[static_cast<std::size_t>(ny) * field.width + nx]) {
                    keep = false;
                    break;
                }
            }
            if (keep) out[i] = m;
        }
    return out;
}

/// Double thresholding with 8-connected edge linking: strong pixels seed a
/// flood fill over weak pixels.
inline EdgeMap hysteresis(int width, int height, const std::vector<float>& suppressed,
                          const EdgeParams& params) {
    params.validate();
    const float high = static_cast<float>(params.threshold_t);
    const float low = static_cast<float>(params.threshold_t * params.low_ratio);

    EdgeMap edges(width, height);
    std::vector<std::pair<int, int>> stack;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            if (suppressed[static_cast<std::size_t>(y) * width + x] >= high) {
                edges.set(x, y);
                stack.emplace_back(x, y);
            }

    while (!stack.empty()) {
        const auto [cx, cy] = stack.back();
        stack.pop_back();
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0) continue;
                const int nx = cx + dx, ny = cy + dy;
                if (nx < 0 || nx >= width || ny < 0 || ny >= height) continue;
                if (edges.at(nx, ny)) continue;
                if (suppressed[static_cast<std::size_t>(ny) * width + nx] >= low) {
                    edges.set(nx, ny);
                    stack.emplace_back(nx, ny);
                }
            }
    }
    return edges;
}

/// Full detector: blur, Sobel gradients, non-maximum suppression, hysteresis.
inline EdgeMap canny(const GrayFrame& frame, const EdgeParams& params) {
    params.validate();
    const GrayFrame blurred = gaussian_blur(frame, params.gaussian_sigma);
    const GradientField field = gradients(blurred);
    const std::vector<float> suppressed = non_max_suppression(field);
    return hysteresis(frame.width, frame.height, suppressed, params);
}

}  // namespace edgegrid
