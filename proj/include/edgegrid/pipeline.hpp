#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "edgegrid/canny.hpp"
#include "edgegrid/detail/parallel.hpp"
#include "edgegrid/eval.hpp"
#include "edgegrid/features.hpp"
#include "edgegrid/grid.hpp"
#include "edgegrid/image.hpp"
#include "edgegrid/image_io.hpp"
#include "edgegrid/labels.hpp"
#include "edgegrid/select.hpp"
#include "edgegrid/svm.hpp"

namespace edgegrid {

/// Experimental constants for one end-to-end run. Defaults match the
/// reported best configuration: grid 20, 5 divisions, edge threshold 0.4,
/// 8-frame windows over every third frame, box constraint 0.4, 10-fold CV.
struct RunConfig {
    GridSpec grid;
    EdgeParams edge;
    int window_size = 8;
    int stride = 1;
    int keep_every = 3;
    ReferenceFrame reference = ReferenceFrame::kFirst;
    KernelParams kernel;
    double train_fraction = 0.7;
    int folds = 10;
    std::uint64_t seed = 0;
    int jobs = 1;
    bool optimize_c = false;                 // grid-search the box constraint on train
    std::vector<double> c_candidates = {0.1, 0.2, 0.4, 0.8, 1.6};
    bool wrapper_selection = false;          // CV-accuracy evaluator instead of correlation merit
    double source_fps = 24.0;

    void validate() const {
        grid.validate();
        edge.validate();
        kernel.validate();
        if (window_size < 2) throw DimensionError("window size must be >= 2");
        if (stride < 1) throw DimensionError("stride must be >= 1");
        if (keep_every < 1) throw DimensionError("keep_every must be >= 1");
        if (!(train_fraction > 0.0 && train_fraction < 1.0))
            throw PartitionError("train fraction must lie strictly between 0 and 1");
        if (folds < 2) throw PartitionError("fold count must be >= 2");
    }
};

/// Down-samples, windows, and featurizes every sequence, attaching resolved
/// labels (window-level first, then episode-level). Output order and bytes
/// are independent of the job count.
inline FeatureTable extract_features(const std::vector<FrameSequence>& corpus,
                                     const ResolvedLabels& labels, const RunConfig& config) {
    config.validate();

    std::vector<Window> all_windows;
    for (const auto& seq : corpus) {
        const FrameSequence kept = downsample(seq, config.keep_every);
        for (auto& window : windows(kept, config.window_size, config.stride))
            all_windows.push_back(std::move(window));
    }

    FeatureTable table;
    table.rows.resize(all_windows.size());
    detail::parallel_for(all_windows.size(), config.jobs, [&](std::size_t i) {
        FeatureVector row = extract(all_windows[i], config.edge, config.grid, config.reference);
        row.label = labels.lookup(row.sequence_id, row.start_index);
        table.rows[i] = std::move(row);
    });
    return table;
}

inline FeatureTable extract_features(const std::filesystem::path& corpus_root,
                                     const RunConfig& config) {
    const std::vector<FrameSequence> corpus = load_corpus(corpus_root, config.source_fps);
    ResolvedLabels labels;
    const std::filesystem::path labels_csv = corpus_root / "labels.csv";
    if (std::filesystem::exists(labels_csv))
        labels = resolve_labels(load_annotations_csv(labels_csv));
    return extract_features(corpus, labels, config);
}

struct PipelineResult {
    FeatureTable features;
    FeatureTable train;
    FeatureTable test;
    FeatureSubset subset;
    SVMModel model;
    ConfusionMatrix matrix;
    std::vector<std::string> warnings;
};

namespace detail {

inline FeatureSubset select_subset(const FeatureTable& train, const RunConfig& config,
                                   std::vector<std::string>* warnings) {
    FeatureSubset subset;
    if (config.wrapper_selection) {
        const SubsetEvaluator evaluate =
            make_wrapper_evaluator(train, config.kernel, config.folds, config.seed);
        subset = best_first_select(train.dimension(), evaluate);
    } else {
        subset = best_first_select(train);
    }
    if (subset.indices.empty()) {
        // Nothing correlated with the classes; fall back to every feature so
        // training can still proceed.
        if (warnings) warnings->push_back("feature selection chose nothing; using all features");
        subset = FeatureSubset::all(train.dimension());
    }
    return subset;
}

}  // namespace detail

/// Full experiment on labeled features: grouped stratified split, feature
/// selection on train, optional C search (CV inside train only), one-vs-one
/// training, confusion on the held-out side.
inline PipelineResult run_pipeline(FeatureTable features, const RunConfig& config) {
    config.validate();

    PipelineResult result;
    result.features = std::move(features);

    auto [train, test] = split(result.features, config.train_fraction, config.seed,
                               &result.warnings);
    result.train = std::move(train);
    result.test = std::move(test);

    result.subset = detail::select_subset(result.train, config, &result.warnings);

    KernelParams kernel = config.kernel;
    if (config.optimize_c)
        kernel.c = grid_search_c(result.train, result.subset,
                                 kernel.resolved_gamma(result.subset.indices.size()),
                                 config.c_candidates, config.folds, config.seed);

    SmoOptions options;
    options.seed = detail::mix_seed(config.seed, 0x7472);
    result.model = ovo_train(result.train, result.subset, kernel, options, &result.warnings);
    result.matrix = confusion(result.model, result.test);
    return result;
}

inline PipelineResult run_pipeline(const std::filesystem::path& corpus_root,
                                   const RunConfig& config) {
    return run_pipeline(extract_features(corpus_root, config), config);
}

// ---------------------------------------------------------------------------
// Parameter sweeps: one full pipeline per point with everything else fixed.

inline constexpr double kSweepFixedThreshold = 0.4;
inline constexpr int kSweepFixedGrid = 20;

namespace detail {

inline SweepPoint sweep_point(const std::vector<FrameSequence>& corpus,
                              const ResolvedLabels& labels, const RunConfig& config,
                              double param) {
    FeatureTable features = extract_features(corpus, labels, config);
    const std::size_t dimension = features.dimension();
    const PipelineResult run = run_pipeline(std::move(features), config);
    SweepPoint point;
    point.param = param;
    point.overall = run.matrix.overall_accuracy();
    for (std::size_t k = 0; k < kClassCount; ++k) point.recall[k] = run.matrix.recall(k);
    point.feature_dimension = dimension;
    return point;
}

inline std::vector<double> sorted_unique(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    return values;
}

}  // namespace detail

/// Edge-threshold sweep at a fixed grid of 20.
inline SweepResult sweep_edge_threshold(const std::vector<FrameSequence>& corpus,
                                        const ResolvedLabels& labels, RunConfig config,
                                        std::vector<double> thresholds = {0.2, 0.4, 0.6, 0.8}) {
    if (thresholds.empty()) throw DegenerateDataError("no thresholds to sweep");
    thresholds = detail::sorted_unique(std::move(thresholds));

    config.grid.g = kSweepFixedGrid;
    config.grid.n_spacing = 0;
    SweepResult result;
    result.axis = SweepAxis::kEdgeThreshold;
    for (double t : thresholds) {
        RunConfig point_config = config;
        point_config.edge.threshold_t = t;
        result.points.push_back(detail::sweep_point(corpus, labels, point_config, t));
    }
    result.validate();
    return result;
}

/// Grid-size sweep at a fixed edge threshold of 0.4.
inline SweepResult sweep_grid_size(const std::vector<FrameSequence>& corpus,
                                   const ResolvedLabels& labels, RunConfig config,
                                   std::vector<double> sizes = {5, 10, 15, 20, 25, 30, 35, 40,
                                                                45, 50}) {
    if (sizes.empty()) throw DegenerateDataError("no grid sizes to sweep");
    sizes = detail::sorted_unique(std::move(sizes));

    config.edge.threshold_t = kSweepFixedThreshold;
    SweepResult result;
    result.axis = SweepAxis::kGridSize;
    for (double size : sizes) {
        RunConfig point_config = config;
        point_config.grid.g = static_cast<int>(size);
        point_config.grid.n_spacing = 0;
        result.points.push_back(detail::sweep_point(corpus, labels, point_config, size));
    }
    result.validate();
    return result;
}

}  // namespace edgegrid
