#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "edgegrid/detail/text.hpp"
#include "edgegrid/errors.hpp"

namespace edgegrid {

inline constexpr std::size_t kClassCount = 7;

/// Row/column order of reported confusion matrices.
inline constexpr std::array<std::string_view, kClassCount> kClassOrder = {
    "anger", "happy", "surprise", "sad", "fear", "disgust", "neutral"};

/// Deterministic order used to break prediction ties.
inline constexpr std::array<std::string_view, kClassCount> kVoteOrder = {
    "happy", "anger", "surprise", "sad", "disgust", "fear", "neutral"};

inline bool is_known_label(std::string_view label) {
    for (auto c : kClassOrder)
        if (c == label) return true;
    return false;
}

inline int class_index(std::string_view label) {
    for (std::size_t i = 0; i < kClassOrder.size(); ++i)
        if (kClassOrder[i] == label) return static_cast<int>(i);
    return -1;
}

/// Like class_index, but unknown labels rank after all known ones (handy as
/// a sort key).
inline std::size_t class_rank(std::string_view label) {
    const int k = class_index(label);
    return k < 0 ? kClassOrder.size() : static_cast<std::size_t>(k);
}

/// Rank in the tie-break order; unknown labels rank after all known ones.
inline int vote_rank(std::string_view label) {
    for (std::size_t i = 0; i < kVoteOrder.size(); ++i)
        if (kVoteOrder[i] == label) return static_cast<int>(i);
    return static_cast<int>(kVoteOrder.size());
}

/// One observer's label for one window. start_index -1 labels the whole
/// sequence (episode-level) and is expanded to every window on ingest.
struct Annotation {
    std::string sequence_id;
    int start_index = -1;
    std::string observer_id;
    std::string label;
};

struct WindowKey {
    std::string sequence_id;
    int start_index = 0;

    auto operator<=>(const WindowKey&) const = default;
};

/// Majority-vote label resolution. Windows whose observers produce no strict
/// plurality are excluded and reported.
struct ResolvedLabels {
    std::map<WindowKey, std::string> by_window;
    std::vector<WindowKey> excluded;

    /// Label for a window: exact (sequence, start) entry first, then the
    /// sequence's episode-level entry. Empty when neither exists.
    std::string lookup(const std::string& sequence_id, int start_index) const {
        if (auto it = by_window.find(WindowKey{sequence_id, start_index}); it != by_window.end())
            return it->second;
        if (auto it = by_window.find(WindowKey{sequence_id, -1}); it != by_window.end())
            return it->second;
        return {};
    }
};

inline ResolvedLabels resolve_labels(const std::vector<Annotation>& annotations) {
    std::map<WindowKey, std::map<std::string, int>> tallies;
    for (const auto& a : annotations) {
        if (!is_known_label(a.label))
            throw FormatError("unknown class label '" + a.label + "'");
        tallies[WindowKey{a.sequence_id, a.start_index}][a.label] += 1;
    }

    ResolvedLabels out;
    for (const auto& [key, tally] : tallies) {
        int best = 0, runner_up = 0;
        std::string winner;
        for (const auto& [label, count] : tally) {
            if (count > best) {
                runner_up = best;
                best = count;
                winner = label;
            } else if (count > runner_up) {
                runner_up = count;
            }
        }
        if (best > runner_up)
            out.by_window[key] = winner;
        else
            out.excluded.push_back(key);
    }
    return out;
}

/// Labels CSV: sequence_id,start_index,observer_id,label.
inline void save_annotations_csv(const std::vector<Annotation>& annotations,
                                 const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << "sequence_id,start_index,observer_id,label\n";
    for (const auto& a : annotations)
        out << a.sequence_id << ',' << a.start_index << ',' << a.observer_id << ',' << a.label
            << '\n';
    if (!out) throw IoError("short write to '" + path.string() + "'");
}

inline std::vector<Annotation> load_annotations_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line)) throw FormatError("'" + path.string() + "' is empty");
    if (detail::trim(line) != "sequence_id,start_index,observer_id,label")
        throw FormatError("'" + path.string() + "' has an unrecognized labels header");

    std::vector<Annotation> out;
    while (std::getline(in, line)) {
        const auto trimmed = detail::trim(line);
        if (trimmed.empty() || trimmed.front() == '#') continue;
        const auto cells = detail::split(trimmed, ',');
        if (cells.size() != 4)
            throw FormatError("'" + path.string() + "' row needs 4 cells: '" + std::string(trimmed) +
                              "'");
        Annotation a;
        a.sequence_id = std::string(cells[0]);
        a.start_index = static_cast<int>(detail::parse_long(cells[1], "start_index"));
        a.observer_id = std::string(cells[2]);
        a.label = std::string(cells[3]);
        if (!is_known_label(a.label)) throw FormatError("unknown class label '" + a.label + "'");
        out.push_back(std::move(a));
    }
    return out;
}

}  // namespace edgegrid
