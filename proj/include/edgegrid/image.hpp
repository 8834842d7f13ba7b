#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "edgegrid/errors.hpp"

namespace edgegrid {

/// Row-major grayscale raster with intensities in [0, 1].
struct GrayFrame {
    int width = 0;
    int height = 0;
    std::vector<float> data;

    GrayFrame() = default;
    GrayFrame(int w, int h, float fill = 0.0f) : width(w), height(h) {
        if (w <= 0 || h <= 0) throw DimensionError("frame dimensions must be positive");
        data.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill);
    }

    float at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
    float& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }

    // Clamp-to-edge access.
    float at_clamped(int x, int y) const {
        if (x < 0) x = 0;
        if (x >= width) x = width - 1;
        if (y < 0) y = 0;
        if (y >= height) y = height - 1;
        return at(x, y);
    }

    std::size_t size() const { return data.size(); }
};

/// Ordered frames from one recording, all with identical dimensions.
struct FrameSequence {
    std::string id;
    std::vector<GrayFrame> frames;
    double source_fps = 24.0;

    void validate() const {
        for (const auto& f : frames)
            if (f.width != frames.front().width || f.height != frames.front().height)
                throw DimensionError("sequence '" + id + "' mixes frame dimensions");
    }
};

/// Fixed-length run of consecutive frames cut from a down-sampled sequence.
struct Window {
    std::vector<GrayFrame> frames;
    std::string sequence_id;
    int start_index = 0;
};

/// BT.601 luma for 8-bit channel values, result in [0, 1].
inline double luma601(double r, double g, double b) {
    return (0.299 * r + 0.587 * g + 0.114 * b) / 255.0;
}

/// Keeps frames 0, k, 2k, ... and divides the frame rate accordingly.
inline FrameSequence downsample(const FrameSequence& seq, int keep_every) {
    if (keep_every < 1) throw DimensionError("keep_every must be >= 1");
    FrameSequence out;
    out.id = seq.id;
    out.source_fps = seq.source_fps / keep_every;
    for (std::size_t i = 0; i < seq.frames.size(); i += static_cast<std::size_t>(keep_every))
        out.frames.push_back(seq.frames[i]);
    return out;
}

/// Consecutive windows of exactly w frames advancing by stride; trailing
/// partial windows are dropped.
inline std::vector<Window> windows(const FrameSequence& seq, int w, int stride) {
    if (w < 2) throw DimensionError("window length must be >= 2");
    if (stride < 1) throw DimensionError("stride must be >= 1");
    std::vector<Window> out;
    if (seq.frames.size() < static_cast<std::size_t>(w)) return out;
    for (std::size_t start = 0; start + static_cast<std::size_t>(w) <= seq.frames.size();
         start += static_cast<std::size_t>(stride)) {
        Window win;
        win.sequence_id = seq.id;
        win.start_index = static_cast<int>(start);
        win.frames.assign(seq.frames.begin() + static_cast<std::ptrdiff_t>(start),
                          seq.frames.begin() + static_cast<std::ptrdiff_t>(start) + w);
        out.push_back(std::move(win));
    }
    return out;
}

}  // namespace edgegrid
