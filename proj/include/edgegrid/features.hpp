#pragma once

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "edgegrid/detail/text.hpp"
#include "edgegrid/errors.hpp"

namespace edgegrid {

/// One window's features: per-slot static occupancy plus per-slot velocity,
/// with an optional class label and a reference back to the source window.
struct FeatureVector {
    std::string sequence_id;
    int start_index = 0;
    std::vector<double> statics;     // 2*g*d values in [0,1]
    std::vector<double> velocities;  // 2*g*d values, pixels per frame
    std::string label;               // empty = unlabeled

    std::size_t dimension() const { return statics.size() + velocities.size(); }

    std::vector<double> full() const {
        std::vector<double> v;
        v.reserve(dimension());
        v.insert(v.end(), statics.begin(), statics.end());
        v.insert(v.end(), velocities.begin(), velocities.end());
        return v;
    }
};

/// A set of feature vectors with uniform dimensions.
struct FeatureTable {
    std::vector<FeatureVector> rows;

    std::size_t size() const { return rows.size(); }
    bool empty() const { return rows.empty(); }

    std::size_t slot_count() const { return rows.empty() ? 0 : rows.front().statics.size(); }
    std::size_t dimension() const { return rows.empty() ? 0 : rows.front().dimension(); }

    void validate() const {
        for (const auto& r : rows)
            if (r.statics.size() != rows.front().statics.size() ||
                r.velocities.size() != rows.front().velocities.size())
                throw DimensionError("feature table mixes vector dimensions");
    }

    /// Distinct labels among labeled rows, sorted lexicographically.
    std::vector<std::string> distinct_labels() const {
        std::vector<std::string> out;
        for (const auto& r : rows)
            if (!r.label.empty() &&
                std::find(out.begin(), out.end(), r.label) == out.end())
                out.push_back(r.label);
        std::sort(out.begin(), out.end());
        return out;
    }
};

namespace detail {

inline std::string slot_column(char prefix, std::size_t index) {
    std::string num = std::to_string(index);
    while (num.size() < 3) num.insert(num.begin(), '0');
    return std::string(1, prefix) + "_" + num;
}

}  // namespace detail

/// CSV layout: sequence_id,start_index,s_000..s_NNN,v_000..v_NNN,label.
/// Slot order is horizontal lines by index then division, then vertical
/// lines likewise.
inline void save_features_csv(const FeatureTable& table, const std::filesystem::path& path) {
    table.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");

    const std::size_t statics = table.slot_count();
    const std::size_t velocities = table.empty() ? 0 : table.rows.front().velocities.size();
    out << "sequence_id,start_index";
    for (std::size_t i = 0; i < statics; ++i) out << ',' << detail::slot_column('s', i);
    for (std::size_t i = 0; i < velocities; ++i) out << ',' << detail::slot_column('v', i);
    out << ",label\n";

    for (const auto& row : table.rows) {
        out << row.sequence_id << ',' << row.start_index;
        for (double v : row.statics) out << ',' << detail::fmt_double(v);
        for (double v : row.velocities) out << ',' << detail::fmt_double(v);
        out << ',' << row.label << '\n';
    }
    if (!out) throw IoError("short write to '" + path.string() + "'");
}

inline FeatureTable load_features_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");

    std::string line;
    if (!std::getline(in, line)) throw FormatError("'" + path.string() + "' is empty");
    const auto header = detail::split(detail::trim(line), ',');
    if (header.size() < 4 || header[0] != "sequence_id" || header[1] != "start_index" ||
        header.back() != "label")
        throw FormatError("'" + path.string() + "' has an unrecognized feature header");

    std::size_t statics = 0, velocities = 0;
    for (std::size_t i = 2; i + 1 < header.size(); ++i) {
        if (header[i].substr(0, 2) == "s_") ++statics;
        else if (header[i].substr(0, 2) == "v_") ++velocities;
        else throw FormatError("unexpected feature column '" + std::string(header[i]) + "'");
    }

    FeatureTable table;
    while (std::getline(in, line)) {
        const auto trimmed = detail::trim(line);
        if (trimmed.empty()) continue;
        const auto cells = detail::split(trimmed, ',');
        if (cells.size() != header.size())
            throw FormatError("'" + path.string() + "' row has " + std::to_string(cells.size()) +
                              " cells, expected " + std::to_string(header.size()));
        FeatureVector row;
        row.sequence_id = std::string(cells[0]);
        row.start_index = static_cast<int>(detail::parse_long(cells[1], "start_index"));
        row.statics.reserve(statics);
        row.velocities.reserve(velocities);
        for (std::size_t i = 0; i < statics; ++i)
            row.statics.push_back(detail::parse_double(cells[2 + i], "feature"));
        for (std::size_t i = 0; i < velocities; ++i)
            row.velocities.push_back(detail::parse_double(cells[2 + statics + i], "feature"));
        row.label = std::string(cells.back());
        table.rows.push_back(std::move(row));
    }
    table.validate();
    return table;
}

}  // namespace edgegrid
