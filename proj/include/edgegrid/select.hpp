#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "edgegrid/detail/text.hpp"
#include "edgegrid/errors.hpp"
#include "edgegrid/features.hpp"
#include "edgegrid/labels.hpp"

namespace edgegrid {

/// An ordered set of selected feature indices with the score that chose it.
struct FeatureSubset {
    std::vector<int> indices;  // unique, ascending
    double merit = 0.0;

    bool contains(int f) const {
        return std::binary_search(indices.begin(), indices.end(), f);
    }

    static FeatureSubset all(std::size_t dimension) {
        FeatureSubset s;
        s.indices.resize(dimension);
        for (std::size_t i = 0; i < dimension; ++i) s.indices[i] = static_cast<int>(i);
        return s;
    }
};

namespace detail {

inline double pearson_abs(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    double mean_a = 0.0, mean_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_a += a[i];
        mean_b += b[i];
    }
    mean_a /= static_cast<double>(n);
    mean_b /= static_cast<double>(n);
    double cov = 0.0, var_a = 0.0, var_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = a[i] - mean_a, db = b[i] - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if (var_a <= 0.0 || var_b <= 0.0) return 0.0;  // zero-variance contributes nothing
    return std::abs(cov / std::sqrt(var_a * var_b));
}

// Feature columns, integer class codes, and memoized correlations for one
// dataset. Class codes follow the canonical class ranking so the same label
// always maps to the same code; labels outside the canonical set fall back
// to lexicographic order after it.
class CorrelationCache {
public:
    explicit CorrelationCache(const FeatureTable& table) {
        table.validate();
        std::vector<std::string> labels = table.distinct_labels();
        if (labels.size() < 2)
            throw DegenerateDataError("feature selection needs at least 2 classes");
        std::sort(labels.begin(), labels.end(),
                  [](const std::string& a, const std::string& b) {
                      const std::size_t ra = class_rank(a), rb = class_rank(b);
                      if (ra != rb) return ra < rb;
                      return a < b;
                  });

        for (const auto& row : table.rows) {
            if (row.label.empty()) continue;
            const auto it = std::find(labels.begin(), labels.end(), row.label);
            class_codes_.push_back(static_cast<double>(it - labels.begin()));
            if (columns_.empty()) columns_.resize(row.dimension());
            const std::vector<double> full = row.full();
            for (std::size_t f = 0; f < full.size(); ++f) columns_[f].push_back(full[f]);
        }
        dimension_ = columns_.size();
        class_corr_.assign(dimension_, -1.0);
        pair_corr_.assign(dimension_ * dimension_, -1.0);
    }

    std::size_t dimension() const { return dimension_; }

    double class_corr(int f) {
        auto& slot = class_corr_[static_cast<std::size_t>(f)];
        if (slot < 0.0) slot = pearson_abs(columns_[static_cast<std::size_t>(f)], class_codes_);
        return slot;
    }

    double pair_corr(int a, int b) {
        const std::size_t i = static_cast<std::size_t>(std::min(a, b)) * dimension_ +
                              static_cast<std::size_t>(std::max(a, b));
        auto& slot = pair_corr_[i];
        if (slot < 0.0)
            slot = pearson_abs(columns_[static_cast<std::size_t>(std::min(a, b))],
                               columns_[static_cast<std::size_t>(std::max(a, b))]);
        return slot;
    }

    // Merit of a candidate subset: k*rcf / sqrt(k + k(k-1)*rff) where rcf is
    // the mean absolute feature-class correlation and rff the mean absolute
    // pairwise feature correlation.
    double merit(const std::vector<int>& subset) {
        const std::size_t k = subset.size();
        if (k == 0) return 0.0;
        double rcf = 0.0;
        for (int f : subset) rcf += class_corr(f);
        rcf /= static_cast<double>(k);
        double rff = 0.0;
        if (k > 1) {
            for (std::size_t i = 0; i < k; ++i)
                for (std::size_t j = i + 1; j < k; ++j) rff += pair_corr(subset[i], subset[j]);
            rff /= static_cast<double>(k * (k - 1) / 2);
        }
        const double kd = static_cast<double>(k);
        return kd * rcf / std::sqrt(kd + kd * (kd - 1.0) * rff);
    }

private:
    std::vector<std::vector<double>> columns_;
    std::vector<double> class_codes_;
    std::vector<double> class_corr_;
    std::vector<double> pair_corr_;
    std::size_t dimension_ = 0;
};

}  // namespace detail

/// Correlation-based subset merit. Empty subsets score 0 by definition.
inline double cfs_merit(const FeatureSubset& subset, const FeatureTable& dataset) {
    detail::CorrelationCache cache(dataset);
    for (int f : subset.indices)
        if (f < 0 || static_cast<std::size_t>(f) >= cache.dimension())
            throw DimensionError("subset index out of range: " + std::to_string(f));
    return cache.merit(subset.indices);
}

/// Scores a candidate subset; higher is better.
using SubsetEvaluator = std::function<double(const std::vector<int>&)>;

namespace detail {

struct SearchNode {
    double merit;
    std::vector<int> indices;

    // Merit descending, then lexicographically smallest index set.
    bool operator<(const SearchNode& other) const {
        if (merit != other.merit) return merit > other.merit;
        return indices < other.indices;
    }
};

inline FeatureSubset best_first_search(std::size_t dimension, const SubsetEvaluator& evaluate,
                                       int max_stale) {
    std::set<SearchNode> open;
    std::set<std::vector<int>> seen;

    SearchNode best{0.0, {}};
    open.insert(best);
    seen.insert(best.indices);

    int stale = 0;
    while (!open.empty() && stale < max_stale) {
        const SearchNode node = *open.begin();
        open.erase(open.begin());

        bool improved = false;
        for (int f = 0; f < static_cast<int>(dimension); ++f) {
            if (std::binary_search(node.indices.begin(), node.indices.end(), f)) continue;
            std::vector<int> child = node.indices;
            child.insert(std::upper_bound(child.begin(), child.end(), f), f);
            if (!seen.insert(child).second) continue;
            const double merit = evaluate(child);
            if (merit > best.merit) {
                best = SearchNode{merit, child};
                improved = true;
            }
            open.insert(SearchNode{merit, std::move(child)});
        }
        stale = improved ? 0 : stale + 1;
    }
    return FeatureSubset{best.indices, best.merit};
}

}  // namespace detail

/// Best-first forward search over single-feature additions, stopping after
/// max_stale consecutive expansions without improving the global best.
/// Deterministic: ties resolve toward the lowest feature indices.
inline FeatureSubset best_first_select(const FeatureTable& dataset, int max_stale = 5) {
    detail::CorrelationCache cache(dataset);
    return detail::best_first_search(
        cache.dimension(), [&cache](const std::vector<int>& s) { return cache.merit(s); },
        max_stale);
}

/// Same search driven by a caller-supplied evaluator (e.g. cross-validated
/// classifier accuracy as a wrapper).
inline FeatureSubset best_first_select(std::size_t dimension, const SubsetEvaluator& evaluate,
                                       int max_stale = 5) {
    return detail::best_first_search(dimension, evaluate, max_stale);
}

/// Text format: header line with the merit, then one feature index per line.
inline void save_subset(const FeatureSubset& subset, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << "merit " << detail::fmt_double(subset.merit) << '\n';
    for (int f : subset.indices) out << f << '\n';
    if (!out) throw IoError("short write to '" + path.string() + "'");
}

inline FeatureSubset load_subset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line)) throw FormatError("'" + path.string() + "' is empty");
    const auto header = detail::split(detail::trim(line), ' ');
    if (header.size() != 2 || header[0] != "merit")
        throw FormatError("'" + path.string() + "' missing merit header");

    FeatureSubset subset;
    subset.merit = detail::parse_double(header[1], "merit");
    while (std::getline(in, line)) {
        const auto trimmed = detail::trim(line);
        if (trimmed.empty()) continue;
        subset.indices.push_back(static_cast<int>(detail::parse_long(trimmed, "feature index")));
    }
    if (!std::is_sorted(subset.indices.begin(), subset.indices.end()) ||
        std::adjacent_find(subset.indices.begin(), subset.indices.end()) != subset.indices.end())
        throw FormatError("'" + path.string() + "' indices must be unique and ascending");
    return subset;
}

}  // namespace edgegrid
