#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "edgegrid/canny.hpp"
#include "edgegrid/errors.hpp"
#include "edgegrid/features.hpp"
#include "edgegrid/image.hpp"

namespace edgegrid {

/// Grid geometry: g interior lines per orientation, d divisions per line,
/// n_spacing equally spaced sample points per line.
struct GridSpec {
    int g = 20;
    int d = 5;
    int n_spacing = 0;  // 0 means "same as g"

    int spacing() const { return n_spacing > 0 ? n_spacing : g; }

    void validate() const {
        if (g < 1) throw DimensionError("grid size must be >= 1");
        if (d < 1) throw DimensionError("divisions must be >= 1");
        if (d > spacing())
            throw DimensionError("divisions exceed sample points per line");
    }

    /// Slots per orientation block; total slot count is twice this.
    int slots_per_block() const { return g * d; }
};

enum class Orientation { kHorizontal, kVertical };

/// Addresses one division of one grid line. The flat feature index is
/// horizontal lines first (line-major, division-minor), then vertical.
struct SlotIndex {
    Orientation orientation = Orientation::kHorizontal;
    int line = 0;
    int division = 0;

    int flat(const GridSpec& spec) const {
        const int base = orientation == Orientation::kHorizontal ? 0 : spec.slots_per_block();
        return base + line * spec.d + division;
    }
};

/// Interior grid-line coordinates: row of each horizontal line and column of
/// each vertical line, both strictly increasing.
struct GridLines {
    std::vector<int> rows;
    std::vector<int> cols;
};

namespace detail {

// Grid coordinates round exact halves down, so L == n sampling hits 0..L-1.
inline int round_half_down(double x) {
    return static_cast<int>(std::ceil(x - 0.5));
}

}  // namespace detail

inline GridLines grid_lines(int width, int height, const GridSpec& spec) {
    spec.validate();
    if (width <= spec.g || height <= spec.g)
        throw DimensionError("frame too small for grid size " + std::to_string(spec.g));
    GridLines lines;
    lines.rows.reserve(static_cast<std::size_t>(spec.g));
    lines.cols.reserve(static_cast<std::size_t>(spec.g));
    for (int i = 0; i < spec.g; ++i) {
        lines.rows.push_back(detail::round_half_down(static_cast<double>(i + 1) * height / (spec.g + 1)));
        lines.cols.push_back(detail::round_half_down(static_cast<double>(i + 1) * width / (spec.g + 1)));
    }
    return lines;
}

/// n_spacing equally spaced along-line pixel offsets on a line of length
/// `line_length`. Duplicates after rounding are kept so the count is fixed.
inline std::vector<int> sample_points(int line_length, const GridSpec& spec) {
    spec.validate();
    const int n = spec.spacing();
    std::vector<int> points;
    points.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        int p = detail::round_half_down((k + 0.5) * static_cast<double>(line_length) / n);
        p = std::min(std::max(p, 0), line_length - 1);
        points.push_back(p);
    }
    return points;
}

namespace detail {

// Sample points of division j: [j*q, (j+1)*q) with q = n/d; the last
// division absorbs the remainder.
inline std::pair<int, int> division_range(int n, int d, int division) {
    const int q = n / d;
    const int begin = division * q;
    const int end = division == d - 1 ? n : begin + q;
    return {begin, end};
}

// A sample point counts as an edge hit if any pixel of its 8-neighborhood
// (radius 1) is an edge. This absorbs 1-px-thin suppressed edges that would
// otherwise slip between integer sample coordinates.
inline bool edge_hit(const EdgeMap& edges, int x, int y) {
    for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
            const int nx = x + dx, ny = y + dy;
            if (nx < 0 || nx >= edges.width || ny < 0 || ny >= edges.height) continue;
            if (edges.at(nx, ny)) return true;
        }
    return false;
}

inline std::pair<int, int> slot_pixel(const GridLines& lines, Orientation orientation, int line,
                                      int along) {
    if (orientation == Orientation::kHorizontal)
        return {along, lines.rows[static_cast<std::size_t>(line)]};
    return {lines.cols[static_cast<std::size_t>(line)], along};
}

}  // namespace detail

/// Binary occupancy per slot: 1 iff any of the division's sample points hits
/// an edge pixel. Returns 2*g*d values, horizontal block then vertical.
inline std::vector<double> occupancy(const EdgeMap& edges, const GridSpec& spec) {
    const GridLines lines = grid_lines(edges.width, edges.height, spec);
    const int n = spec.spacing();
    std::vector<double> slots(static_cast<std::size_t>(2 * spec.slots_per_block()), 0.0);

    for (Orientation orientation : {Orientation::kHorizontal, Orientation::kVertical}) {
        const int length = orientation == Orientation::kHorizontal ? edges.width : edges.height;
        const std::vector<int> points = sample_points(length, spec);
        for (int line = 0; line < spec.g; ++line)
            for (int division = 0; division < spec.d; ++division) {
                const auto [begin, end] = detail::division_range(n, spec.d, division);
                bool hit = false;
                for (int k = begin; k < end && !hit; ++k) {
                    const auto [x, y] = detail::slot_pixel(lines, orientation, line,
                                                           points[static_cast<std::size_t>(k)]);
                    hit = detail::edge_hit(edges, x, y);
                }
                if (hit)
                    slots[static_cast<std::size_t>(
                        SlotIndex{orientation, line, division}.flat(spec))] = 1.0;
            }
    }
    return slots;
}

/// Mean along-line coordinate of the slot's edge-hitting sample points;
/// empty when the slot is unoccupied.
inline std::optional<double> slot_centroid(const EdgeMap& edges, const SlotIndex& slot,
                                           const GridSpec& spec) {
    const GridLines lines = grid_lines(edges.width, edges.height, spec);
    const int length = slot.orientation == Orientation::kHorizontal ? edges.width : edges.height;
    const std::vector<int> points = sample_points(length, spec);
    const auto [begin, end] = detail::division_range(spec.spacing(), spec.d, slot.division);

    double sum = 0.0;
    int hits = 0;
    for (int k = begin; k < end; ++k) {
        const int along = points[static_cast<std::size_t>(k)];
        const auto [x, y] = detail::slot_pixel(lines, slot.orientation, slot.line, along);
        if (detail::edge_hit(edges, x, y)) {
            sum += along;
            ++hits;
        }
    }
    if (hits == 0) return std::nullopt;
    return sum / hits;
}

/// Per-slot mean absolute centroid displacement over consecutive frame pairs
/// where both centroids exist; 0 when no valid pair. Units: pixels per frame
/// at the window's (down-sampled) rate.
inline std::vector<double> velocity_features(const std::vector<EdgeMap>& window,
                                             const GridSpec& spec) {
    spec.validate();
    if (window.size() < 2) throw DimensionError("velocity needs a window of at least 2 frames");
    for (const auto& m : window)
        if (m.width != window.front().width || m.height != window.front().height)
            throw DimensionError("velocity window mixes edge-map dimensions");

    const int slots_per_block = spec.slots_per_block();
    std::vector<double> velocities(static_cast<std::size_t>(2 * slots_per_block), 0.0);

    // Centroids per frame, indexed by flat slot.
    std::vector<std::vector<std::optional<double>>> centroids(window.size());
    for (std::size_t t = 0; t < window.size(); ++t) {
        centroids[t].resize(static_cast<std::size_t>(2 * slots_per_block));
        for (Orientation orientation : {Orientation::kHorizontal, Orientation::kVertical})
            for (int line = 0; line < spec.g; ++line)
                for (int division = 0; division < spec.d; ++division) {
                    const SlotIndex slot{orientation, line, division};
                    centroids[t][static_cast<std::size_t>(slot.flat(spec))] =
                        slot_centroid(window[t], slot, spec);
                }
    }

    for (std::size_t slot = 0; slot < velocities.size(); ++slot) {
        double sum = 0.0;
        int pairs = 0;
        for (std::size_t t = 0; t + 1 < window.size(); ++t) {
            const auto& a = centroids[t][slot];
            const auto& b = centroids[t + 1][slot];
            if (a && b) {
                sum += std::abs(*b - *a);
                ++pairs;
            }
        }
        velocities[slot] = pairs > 0 ? sum / pairs : 0.0;
    }
    return velocities;
}

/// Which window frame supplies the static occupancy features.
enum class ReferenceFrame { kFirst, kMiddle, kLast };

inline std::size_t reference_index(ReferenceFrame reference, std::size_t window_size) {
    switch (reference) {
        case ReferenceFrame::kMiddle: return (window_size - 1) / 2;
        case ReferenceFrame::kLast: return window_size - 1;
        case ReferenceFrame::kFirst: break;
    }
    return 0;
}

/// Full per-window extraction: edge detection on every frame, static
/// occupancy from the reference frame, velocities across the window.
inline FeatureVector extract(const Window& window, const EdgeParams& edge_params,
                             const GridSpec& spec, ReferenceFrame reference = ReferenceFrame::kFirst) {
    spec.validate();
    if (window.frames.size() < 2) throw DimensionError("window must hold at least 2 frames");

    std::vector<EdgeMap> edge_maps;
    edge_maps.reserve(window.frames.size());
    for (const auto& frame : window.frames) edge_maps.push_back(canny(frame, edge_params));

    FeatureVector out;
    out.sequence_id = window.sequence_id;
    out.start_index = window.start_index;
    out.statics = occupancy(edge_maps[reference_index(reference, edge_maps.size())], spec);
    out.velocities = velocity_features(edge_maps, spec);
    return out;
}

}  // namespace edgegrid
