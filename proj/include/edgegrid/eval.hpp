#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "edgegrid/detail/rng.hpp"
#include "edgegrid/detail/text.hpp"
#include "edgegrid/errors.hpp"
#include "edgegrid/features.hpp"
#include "edgegrid/labels.hpp"
#include "edgegrid/select.hpp"
#include "edgegrid/svm.hpp"

namespace edgegrid {

namespace detail {

// Rows grouped by sequence_id with a majority label per group. Groups are
// ordered by id so downstream shuffles depend only on the seed.
struct SequenceGroup {
    std::string sequence_id;
    std::vector<std::size_t> rows;
    std::string label;
};

inline std::vector<SequenceGroup> group_by_sequence(const FeatureTable& table) {
    std::map<std::string, std::vector<std::size_t>> by_id;
    for (std::size_t r = 0; r < table.rows.size(); ++r)
        by_id[table.rows[r].sequence_id].push_back(r);

    std::vector<SequenceGroup> groups;
    for (auto& [id, rows] : by_id) {
        std::map<std::string, std::size_t> tally;
        for (std::size_t r : rows) tally[table.rows[r].label] += 1;
        std::string best;
        std::size_t best_count = 0;
        for (const auto& [label, count] : tally) {
            const bool wins = count > best_count ||
                              (count == best_count &&
                               (class_rank(label) < class_rank(best) ||
                                (class_rank(label) == class_rank(best) && label < best)));
            if (best.empty() || wins) {
                best = label;
                best_count = count;
            }
        }
        groups.push_back(SequenceGroup{id, std::move(rows), std::move(best)});
    }
    return groups;
}

inline std::vector<std::string> group_class_order(const std::vector<SequenceGroup>& groups) {
    std::vector<std::string> classes;
    for (const auto& g : groups)
        if (std::find(classes.begin(), classes.end(), g.label) == classes.end())
            classes.push_back(g.label);
    std::sort(classes.begin(), classes.end(), [](const std::string& a, const std::string& b) {
        const std::size_t ra = class_rank(a), rb = class_rank(b);
        if (ra != rb) return ra < rb;
        return a < b;
    });
    return classes;
}

inline FeatureTable take_rows(const FeatureTable& table, const std::vector<std::size_t>& rows) {
    FeatureTable out;
    std::vector<std::size_t> sorted = rows;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t r : sorted) out.rows.push_back(table.rows[r]);
    return out;
}

}  // namespace detail

/// Stratified train/test split over whole sequences: every window of a
/// sequence_id lands on the same side. Classes with fewer than 2 sequences
/// go entirely to train (reported through `warnings`).
inline std::pair<FeatureTable, FeatureTable> split(const FeatureTable& dataset,
                                                   double train_fraction, std::uint64_t seed,
                                                   std::vector<std::string>* warnings = nullptr) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw PartitionError("train fraction must lie strictly between 0 and 1");
    dataset.validate();

    std::vector<detail::SequenceGroup> groups = detail::group_by_sequence(dataset);
    std::mt19937_64 rng(detail::mix_seed(seed, 0x73706c69));

    std::vector<std::size_t> train_rows, test_rows;
    for (const std::string& cls : detail::group_class_order(groups)) {
        std::vector<std::size_t> members;
        for (std::size_t g = 0; g < groups.size(); ++g)
            if (groups[g].label == cls) members.push_back(g);
        detail::shuffle(members, rng);

        const std::size_t n = members.size();
        if (n < 2) {
            if (warnings)
                warnings->push_back("class '" + cls +
                                    "' has fewer than 2 sequences; placed entirely in train");
            for (std::size_t g : members)
                train_rows.insert(train_rows.end(), groups[g].rows.begin(), groups[g].rows.end());
            continue;
        }
        std::size_t n_train = static_cast<std::size_t>(
            std::llround(train_fraction * static_cast<double>(n)));
        n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
        for (std::size_t i = 0; i < n; ++i) {
            auto& side = i < n_train ? train_rows : test_rows;
            side.insert(side.end(), groups[members[i]].rows.begin(), groups[members[i]].rows.end());
        }
    }
    return {detail::take_rows(dataset, train_rows), detail::take_rows(dataset, test_rows)};
}

/// Stratified, sequence-grouped k-fold partition. Returns row indices into
/// `train` per fold; folds are disjoint, cover the input, and never split a
/// sequence. Groups are dealt round-robin so fold sizes differ by at most
/// one group.
inline std::vector<std::vector<std::size_t>> kfold(const FeatureTable& train, int k,
                                                   std::uint64_t seed) {
    if (k < 2) throw PartitionError("k-fold needs k >= 2");
    train.validate();
    if (train.rows.size() < static_cast<std::size_t>(k))
        throw PartitionError("fewer rows than folds");

    std::vector<detail::SequenceGroup> groups = detail::group_by_sequence(train);
    if (groups.size() < static_cast<std::size_t>(k))
        throw PartitionError("fewer sequence groups than folds: " +
                             std::to_string(groups.size()) + " < " + std::to_string(k));

    std::mt19937_64 rng(detail::mix_seed(seed, 0x666f6c64));
    std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
    std::size_t next_fold = 0;
    for (const std::string& cls : detail::group_class_order(groups)) {
        std::vector<std::size_t> members;
        for (std::size_t g = 0; g < groups.size(); ++g)
            if (groups[g].label == cls) members.push_back(g);
        detail::shuffle(members, rng);
        for (std::size_t g : members) {
            auto& fold = folds[next_fold % static_cast<std::size_t>(k)];
            fold.insert(fold.end(), groups[g].rows.begin(), groups[g].rows.end());
            ++next_fold;
        }
    }
    for (auto& fold : folds) std::sort(fold.begin(), fold.end());
    return folds;
}

/// Row-normalized confusion matrix over the fixed class list, plus raw
/// counts so support and overall accuracy stay exact.
struct ConfusionMatrix {
    static constexpr std::size_t kSize = kClassCount;

    std::array<std::array<long long, kSize>, kSize> counts{};  // [true][predicted]

    static std::size_t index_of(const std::string& label) {
        const std::size_t k = class_rank(label);
        if (k >= kSize) throw FormatError("unknown class label '" + label + "'");
        return k;
    }

    void add(const std::string& true_label, const std::string& predicted, long long n = 1) {
        counts[index_of(true_label)][index_of(predicted)] += n;
    }

    long long support(std::size_t row) const {
        long long s = 0;
        for (long long v : counts[row]) s += v;
        return s;
    }

    long long total() const {
        long long t = 0;
        for (std::size_t r = 0; r < kSize; ++r) t += support(r);
        return t;
    }

    std::array<std::array<double, kSize>, kSize> normalized() const {
        std::array<std::array<double, kSize>, kSize> rows{};
        for (std::size_t r = 0; r < kSize; ++r) {
            const long long s = support(r);
            for (std::size_t c = 0; c < kSize; ++c)
                rows[r][c] = s > 0 ? static_cast<double>(counts[r][c]) / static_cast<double>(s)
                                   : 0.0;
        }
        return rows;
    }

    double recall(std::size_t row) const {
        const long long s = support(row);
        return s > 0 ? static_cast<double>(counts[row][row]) / static_cast<double>(s) : 0.0;
    }

    double overall_accuracy() const {
        const long long t = total();
        if (t == 0) return 0.0;
        long long correct = 0;
        for (std::size_t r = 0; r < kSize; ++r) correct += counts[r][r];
        return static_cast<double>(correct) / static_cast<double>(t);
    }
};

inline ConfusionMatrix confusion(const SVMModel& model, const FeatureTable& test) {
    test.validate();
    if (test.rows.empty()) throw DegenerateDataError("cannot evaluate on an empty test set");
    ConfusionMatrix m;
    for (const auto& row : test.rows) m.add(row.label, model.predict(row));
    return m;
}

/// Builds the matrix from (true, predicted, count) triples, e.g. a published
/// reference table.
inline ConfusionMatrix confusion_from_pairs(
    const std::vector<std::tuple<std::string, std::string, long long>>& pairs) {
    ConfusionMatrix m;
    for (const auto& [truth, predicted, count] : pairs) m.add(truth, predicted, count);
    return m;
}

// ---------------------------------------------------------------------------
// Cross-validated accuracy and the C grid search.

/// Mean accuracy over k folds: each fold is held out once while the others
/// train. Folds whose training half collapses to one class are skipped.
inline double cv_accuracy(const FeatureTable& train, const FeatureSubset& subset,
                          KernelParams params, int folds, std::uint64_t seed) {
    const auto fold_rows = kfold(train, folds, seed);
    double accuracy_sum = 0.0;
    int evaluated = 0;
    for (std::size_t f = 0; f < fold_rows.size(); ++f) {
        if (fold_rows[f].empty()) continue;
        std::vector<std::size_t> train_rows;
        for (std::size_t g = 0; g < fold_rows.size(); ++g)
            if (g != f) train_rows.insert(train_rows.end(), fold_rows[g].begin(),
                                          fold_rows[g].end());
        const FeatureTable fold_train = detail::take_rows(train, train_rows);
        if (fold_train.distinct_labels().size() < 2) continue;

        SmoOptions options;
        options.seed = detail::mix_seed(seed, 0x6376 + f);
        const SVMModel model = ovo_train(fold_train, subset, params, options);
        long long correct = 0, seen = 0;
        for (std::size_t r : fold_rows[f]) {
            ++seen;
            if (model.predict(train.rows[r]) == train.rows[r].label) ++correct;
        }
        accuracy_sum += static_cast<double>(correct) / static_cast<double>(seen);
        ++evaluated;
    }
    if (evaluated == 0) throw DegenerateDataError("no evaluable folds in cross-validation");
    return accuracy_sum / evaluated;
}

/// Picks the box constraint with the best mean k-fold accuracy on training
/// data only; ties resolve toward the smaller value.
inline double grid_search_c(const FeatureTable& train, const FeatureSubset& subset,
                            double gamma, const std::vector<double>& candidates, int folds,
                            std::uint64_t seed) {
    if (candidates.empty()) throw DegenerateDataError("empty candidate list for c search");
    double best_c = 0.0, best_accuracy = -1.0;
    for (double c : candidates) {
        KernelParams params;
        params.gamma = gamma;
        params.c = c;
        const double accuracy = cv_accuracy(train, subset, params, folds, seed);
        if (accuracy > best_accuracy || (accuracy == best_accuracy && c < best_c)) {
            best_accuracy = accuracy;
            best_c = c;
        }
    }
    return best_c;
}

/// Subset evaluator that scores candidates by cross-validated classifier
/// accuracy instead of the correlation merit (a wrapper around the learner).
inline SubsetEvaluator make_wrapper_evaluator(const FeatureTable& train, KernelParams params,
                                              int folds, std::uint64_t seed) {
    return [&train, params, folds, seed](const std::vector<int>& indices) {
        if (indices.empty()) return 0.0;
        FeatureSubset subset{indices, 0.0};
        return cv_accuracy(train, subset, params, folds, seed);
    };
}

// ---------------------------------------------------------------------------
// Sweep results.

enum class SweepAxis { kEdgeThreshold, kGridSize };

struct SweepPoint {
    double param = 0.0;
    std::array<double, kClassCount> recall{};
    double overall = 0.0;
    std::size_t feature_dimension = 0;  // recorded so length laws are checkable per point
};

struct SweepResult {
    SweepAxis axis = SweepAxis::kEdgeThreshold;
    std::vector<SweepPoint> points;

    void validate() const {
        for (std::size_t i = 1; i < points.size(); ++i)
            if (!(points[i - 1].param < points[i].param))
                throw PartitionError("sweep parameter values must be strictly increasing");
    }
};

// ---------------------------------------------------------------------------
// File formats.

struct PredictionRow {
    std::string sequence_id;
    long start_index = 0;
    std::string true_label;
    std::string predicted_label;
};

inline void save_predictions_csv(const std::vector<PredictionRow>& rows,
                                 const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << "sequence_id,start_index,true_label,predicted_label\n";
    for (const auto& row : rows)
        out << row.sequence_id << ',' << row.start_index << ',' << row.true_label << ','
            << row.predicted_label << '\n';
    if (!out) throw IoError("short write to '" + path.string() + "'");
}

inline std::vector<PredictionRow> load_predictions_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line)) throw FormatError("'" + path.string() + "' is empty");
    if (detail::trim(line) != "sequence_id,start_index,true_label,predicted_label")
        throw FormatError("'" + path.string() + "' has an unexpected header");
    std::vector<PredictionRow> rows;
    while (std::getline(in, line)) {
        const auto trimmed = detail::trim(line);
        if (trimmed.empty()) continue;
        const auto fields = detail::split(trimmed, ',');
        if (fields.size() != 4)
            throw FormatError("'" + path.string() + "': expected 4 fields, got " +
                              std::to_string(fields.size()));
        rows.push_back(PredictionRow{std::string(fields[0]),
                                     detail::parse_long(fields[1], "start_index"),
                                     std::string(fields[2]), std::string(fields[3])});
    }
    return rows;
}

/// Aggregated (true,predicted,count) triples — the shape reference matrices
/// ship in.
inline std::vector<std::tuple<std::string, std::string, long long>> load_pairs_csv(
    const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line)) throw FormatError("'" + path.string() + "' is empty");
    if (detail::trim(line) != "true_label,predicted_label,count")
        throw FormatError("'" + path.string() + "' has an unexpected header");
    std::vector<std::tuple<std::string, std::string, long long>> pairs;
    while (std::getline(in, line)) {
        const auto trimmed = detail::trim(line);
        if (trimmed.empty() || trimmed.front() == '#') continue;
        const auto fields = detail::split(trimmed, ',');
        if (fields.size() != 3)
            throw FormatError("'" + path.string() + "': expected 3 fields, got " +
                              std::to_string(fields.size()));
        pairs.emplace_back(std::string(fields[0]), std::string(fields[1]),
                           detail::parse_long(fields[2], "count"));
    }
    return pairs;
}

inline void save_confusion_csv(const ConfusionMatrix& matrix, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << "true_class";
    for (const auto& name : kClassOrder) out << ',' << name;
    out << '\n';
    const auto rows = matrix.normalized();
    for (std::size_t r = 0; r < ConfusionMatrix::kSize; ++r) {
        out << kClassOrder[r];
        for (std::size_t c = 0; c < ConfusionMatrix::kSize; ++c)
            out << ',' << detail::fmt_double(rows[r][c]);
        out << '\n';
    }
    if (!out) throw IoError("short write to '" + path.string() + "'");
}

inline void save_metrics(const ConfusionMatrix& matrix, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << "overall_accuracy " << detail::fmt_double(matrix.overall_accuracy()) << '\n';
    for (std::size_t r = 0; r < ConfusionMatrix::kSize; ++r)
        out << "recall_" << kClassOrder[r] << ' ' << detail::fmt_double(matrix.recall(r)) << " ("
            << matrix.support(r) << " samples)\n";
    if (!out) throw IoError("short write to '" + path.string() + "'");
}

inline void save_sweep_csv(const SweepResult& result, const std::filesystem::path& path) {
    result.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << "param,class,recall,overall\n";
    for (const auto& point : result.points)
        for (std::size_t k = 0; k < kClassCount; ++k)
            out << detail::fmt_double(point.param) << ',' << kClassOrder[k] << ','
                << detail::fmt_double(point.recall[k]) << ',' << detail::fmt_double(point.overall)
                << '\n';
    if (!out) throw IoError("short write to '" + path.string() + "'");
}

}  // namespace edgegrid
