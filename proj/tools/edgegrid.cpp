// Command-line front end: each subcommand is one pipeline stage, talking to
// the others through files.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "edgegrid/edgegrid.hpp"

namespace {

namespace fs = std::filesystem;
using namespace edgegrid;

void add_grid_flags(CLI::App* cmd, RunConfig& config) {
    cmd->add_option("--grid", config.grid.g, "Grid lines per orientation")
        ->capture_default_str();
    cmd->add_option("--divisions", config.grid.d, "Divisions per grid line")
        ->capture_default_str();
    cmd->add_option("--spacing", config.grid.n_spacing,
                    "Sample points per line (0 = same as --grid)")
        ->capture_default_str();
}

void add_edge_flags(CLI::App* cmd, RunConfig& config) {
    cmd->add_option("--edge-threshold", config.edge.threshold_t,
                    "High hysteresis threshold on normalized gradient magnitude")
        ->capture_default_str();
    cmd->add_option("--low-ratio", config.edge.low_ratio, "Low threshold as a fraction of high")
        ->capture_default_str();
    cmd->add_option("--sigma", config.edge.gaussian_sigma, "Gaussian smoothing sigma")
        ->capture_default_str();
}

void add_window_flags(CLI::App* cmd, RunConfig& config, std::string& reference) {
    cmd->add_option("--window", config.window_size, "Frames per analysis window")
        ->capture_default_str();
    cmd->add_option("--stride", config.stride, "Window step in down-sampled frames")
        ->capture_default_str();
    cmd->add_option("--keep-every", config.keep_every, "Keep every Nth source frame")
        ->capture_default_str();
    cmd->add_option("--reference", reference, "Static-feature frame: first|middle|last")
        ->capture_default_str();
    cmd->add_option("--fps", config.source_fps, "Source frame rate")->capture_default_str();
}

void add_kernel_flags(CLI::App* cmd, RunConfig& config) {
    cmd->add_option("--slack-c", config.kernel.c, "Box constraint on dual coefficients")
        ->capture_default_str();
    cmd->add_option("--gamma", config.kernel.gamma, "RBF gamma (0 = 1/feature count)")
        ->capture_default_str();
}

ReferenceFrame parse_reference(const std::string& name) {
    if (name == "first") return ReferenceFrame::kFirst;
    if (name == "middle") return ReferenceFrame::kMiddle;
    if (name == "last") return ReferenceFrame::kLast;
    throw FormatError("--reference must be first, middle, or last, got '" + name + "'");
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

ResolvedLabels load_labels_for(const fs::path& corpus, const std::string& labels_path) {
    fs::path path = labels_path.empty() ? corpus / "labels.csv" : fs::path(labels_path);
    if (!fs::exists(path)) {
        if (!labels_path.empty()) throw IoError("labels file '" + path.string() + "' not found");
        return {};
    }
    ResolvedLabels resolved = resolve_labels(load_annotations_csv(path));
    if (!resolved.excluded.empty())
        std::cerr << "warning: " << resolved.excluded.size()
                  << " window(s) excluded for lack of a strict label plurality\n";
    return resolved;
}

void dump_edge_maps(const std::vector<FrameSequence>& corpus, const RunConfig& config,
                    const fs::path& dir) {
    for (const auto& seq : corpus) {
        const FrameSequence kept = downsample(seq, config.keep_every);
        const fs::path seq_dir = dir / seq.id;
        fs::create_directories(seq_dir);
        for (std::size_t f = 0; f < kept.frames.size(); ++f) {
            const EdgeMap edges = canny(kept.frames[f], config.edge);
            char name[32];
            std::snprintf(name, sizeof name, "edge_%05zu.pgm", f);
            save_mask_pgm(edges.width, edges.height, edges.data, seq_dir / name);
        }
    }
}

int run(int argc, char** argv) {
    CLI::App app{"Edge-grid motion features and SVM classification pipeline"};
    app.require_subcommand(1);

    RunConfig config;
    std::string reference = "first";
    app.add_option("--seed", config.seed, "Random seed")->capture_default_str();
    app.add_option("--jobs", config.jobs, "Worker threads")->capture_default_str();

    // --- synth ---------------------------------------------------------
    auto* synth = app.add_subcommand("synth", "Generate a synthetic labeled corpus");
    std::string synth_out;
    SynthConfig synth_config;
    synth->add_option("--out", synth_out, "Corpus root directory")->required();
    synth->add_option("--sequences", synth_config.sequences_per_class,
                      "Sequences per class")->capture_default_str();
    synth->add_option("--frames", synth_config.frames, "Frames per sequence")
        ->capture_default_str();
    synth->add_option("--width", synth_config.width, "Frame width")->capture_default_str();
    synth->add_option("--height", synth_config.height, "Frame height")->capture_default_str();

    // --- extract -------------------------------------------------------
    auto* extract_cmd = app.add_subcommand("extract", "Extract feature vectors from a corpus");
    std::string extract_corpus, extract_out, extract_labels, dump_edges;
    extract_cmd->add_option("--corpus", extract_corpus, "Corpus root")->required();
    extract_cmd->add_option("--out", extract_out, "Output features CSV")->required();
    extract_cmd->add_option("--labels", extract_labels,
                            "Annotations CSV (default <corpus>/labels.csv)");
    extract_cmd->add_option("--dump-edges", dump_edges, "Directory for edge-map PGMs");
    add_grid_flags(extract_cmd, config);
    add_edge_flags(extract_cmd, config);
    add_window_flags(extract_cmd, config, reference);

    // --- select --------------------------------------------------------
    auto* select_cmd = app.add_subcommand("select", "Choose a feature subset");
    std::string select_features, select_out;
    bool wrapper = false;
    select_cmd->add_option("--features", select_features, "Features CSV")->required();
    select_cmd->add_option("--out", select_out, "Output subset file")->required();
    select_cmd->add_flag("--wrapper", wrapper,
                         "Score subsets by cross-validated accuracy instead of correlation");
    select_cmd->add_option("--folds", config.folds, "CV folds for --wrapper")
        ->capture_default_str();
    add_kernel_flags(select_cmd, config);

    // --- train ---------------------------------------------------------
    auto* train_cmd = app.add_subcommand("train", "Train the multiclass model");
    std::string train_features, train_subset, train_out;
    bool optimize_c = false;
    train_cmd->add_option("--features", train_features, "Features CSV")->required();
    train_cmd->add_option("--subset", train_subset,
                          "Subset file from `select` (default: run selection)");
    train_cmd->add_option("--out", train_out, "Output model file")->required();
    train_cmd->add_flag("--optimize-c", optimize_c,
                        "Grid-search the box constraint by cross-validation");
    train_cmd->add_option("--folds", config.folds, "CV folds for --optimize-c")
        ->capture_default_str();
    add_kernel_flags(train_cmd, config);

    // --- predict -------------------------------------------------------
    auto* predict_cmd = app.add_subcommand("predict", "Label feature vectors with a model");
    std::string predict_model, predict_features, predict_out;
    predict_cmd->add_option("--model", predict_model, "Model file")->required();
    predict_cmd->add_option("--features", predict_features, "Features CSV")->required();
    predict_cmd->add_option("--out", predict_out, "Output predictions CSV")->required();

    // --- evaluate ------------------------------------------------------
    auto* eval_cmd = app.add_subcommand(
        "evaluate", "Emit a confusion matrix and metrics from a model or counted pairs");
    std::string eval_model, eval_features, eval_pairs, eval_dir = ".", eval_predictions;
    eval_cmd->add_option("--model", eval_model, "Model file");
    eval_cmd->add_option("--features", eval_features, "Labeled features CSV");
    eval_cmd->add_option("--pairs", eval_pairs, "true_label,predicted_label,count CSV");
    eval_cmd->add_option("--out-dir", eval_dir, "Directory for confusion.csv and metrics.txt")
        ->capture_default_str();
    eval_cmd->add_option("--predictions-out", eval_predictions, "Also write predictions CSV");

    // --- sweep ---------------------------------------------------------
    auto* sweep_cmd = app.add_subcommand("sweep", "Parameter sweep over the full pipeline");
    std::string sweep_corpus, sweep_labels, sweep_axis = "edge", sweep_out;
    std::vector<double> sweep_values;
    sweep_cmd->add_option("--corpus", sweep_corpus, "Corpus root")->required();
    sweep_cmd->add_option("--labels", sweep_labels,
                          "Annotations CSV (default <corpus>/labels.csv)");
    sweep_cmd->add_option("--axis", sweep_axis, "edge | grid")->capture_default_str();
    sweep_cmd->add_option("--out", sweep_out, "Output sweep CSV")->required();
    sweep_cmd->add_option("--values", sweep_values,
                          "Explicit sweep values (default: standard set)");
    sweep_cmd->add_option("--train-fraction", config.train_fraction, "Training share")
        ->capture_default_str();
    add_grid_flags(sweep_cmd, config);
    add_edge_flags(sweep_cmd, config);
    add_window_flags(sweep_cmd, config, reference);
    add_kernel_flags(sweep_cmd, config);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);  // prints help or the error message
        return code == 0 ? 0 : 2;      // usage problems exit 2
    }
    config.reference = parse_reference(reference);
    config.wrapper_selection = wrapper;
    config.optimize_c = optimize_c;

    if (synth->parsed()) {
        synth_config.seed = config.seed;
        synth_config.jobs = config.jobs;
        generate_synthetic(synth_out, default_class_specs(), synth_config);
        std::cout << "wrote " << default_class_specs().size() * synth_config.sequences_per_class
                  << " sequences under " << synth_out << '\n';
        return 0;
    }

    if (extract_cmd->parsed()) {
        const std::vector<FrameSequence> corpus = load_corpus(extract_corpus, config.source_fps);
        const ResolvedLabels labels = load_labels_for(extract_corpus, extract_labels);
        const FeatureTable table = extract_features(corpus, labels, config);
        save_features_csv(table, extract_out);
        if (!dump_edges.empty()) dump_edge_maps(corpus, config, dump_edges);
        std::cout << "wrote " << table.rows.size() << " rows x " << table.dimension()
                  << " features to " << extract_out << '\n';
        return 0;
    }

    if (select_cmd->parsed()) {
        const FeatureTable table = load_features_csv(select_features);
        FeatureSubset subset;
        if (wrapper) {
            const SubsetEvaluator evaluate =
                make_wrapper_evaluator(table, config.kernel, config.folds, config.seed);
            subset = best_first_select(table.dimension(), evaluate);
        } else {
            subset = best_first_select(table);
        }
        save_subset(subset, select_out);
        std::cout << "selected " << subset.indices.size() << " features (merit "
                  << detail::fmt_double(subset.merit) << ") to " << select_out << '\n';
        return 0;
    }

    if (train_cmd->parsed()) {
        const FeatureTable table = load_features_csv(train_features);
        FeatureSubset subset;
        if (!train_subset.empty()) {
            subset = load_subset(train_subset);
        } else {
            std::cerr << "note: no --subset given; running feature selection\n";
            subset = best_first_select(table);
            if (subset.indices.empty()) subset = FeatureSubset::all(table.dimension());
        }
        KernelParams kernel = config.kernel;
        if (optimize_c)
            kernel.c = grid_search_c(table, subset,
                                     kernel.resolved_gamma(subset.indices.size()),
                                     config.c_candidates, config.folds, config.seed);
        SmoOptions options;
        options.seed = detail::mix_seed(config.seed, 0x7472);
        std::vector<std::string> warnings;
        const SVMModel model = ovo_train(table, subset, kernel, options, &warnings);
        print_warnings(warnings);
        save_model(model, train_out);
        std::cout << "trained " << model.machines.size() << " machines over "
                  << model.classes.size() << " classes (c " << detail::fmt_double(model.c)
                  << ", gamma " << detail::fmt_double(model.gamma) << ") to " << train_out
                  << '\n';
        return 0;
    }

    if (predict_cmd->parsed()) {
        const SVMModel model = load_model(predict_model);
        const FeatureTable table = load_features_csv(predict_features);
        std::vector<PredictionRow> rows;
        for (const auto& row : table.rows)
            rows.push_back(PredictionRow{row.sequence_id, row.start_index, row.label,
                                         model.predict(row)});
        save_predictions_csv(rows, predict_out);
        std::cout << "wrote " << rows.size() << " predictions to " << predict_out << '\n';
        return 0;
    }

    if (eval_cmd->parsed()) {
        ConfusionMatrix matrix;
        if (!eval_pairs.empty()) {
            if (!eval_model.empty() || !eval_features.empty())
                throw FormatError("--pairs cannot be combined with --model/--features");
            matrix = confusion_from_pairs(load_pairs_csv(eval_pairs));
        } else {
            if (eval_model.empty() || eval_features.empty())
                throw FormatError("evaluate needs either --pairs or --model with --features");
            const SVMModel model = load_model(eval_model);
            const FeatureTable table = load_features_csv(eval_features);
            std::vector<PredictionRow> rows;
            for (const auto& row : table.rows) {
                if (row.label.empty())
                    throw FormatError("row for sequence '" + row.sequence_id +
                                      "' has no true label; evaluation needs labeled data");
                rows.push_back(PredictionRow{row.sequence_id, row.start_index, row.label,
                                             model.predict(row)});
                matrix.add(rows.back().true_label, rows.back().predicted_label);
            }
            if (!eval_predictions.empty()) save_predictions_csv(rows, eval_predictions);
        }
        fs::create_directories(eval_dir);
        save_confusion_csv(matrix, fs::path(eval_dir) / "confusion.csv");
        save_metrics(matrix, fs::path(eval_dir) / "metrics.txt");
        std::cout << "overall_accuracy " << detail::fmt_double(matrix.overall_accuracy())
                  << '\n';
        return 0;
    }

    if (sweep_cmd->parsed()) {
        const std::vector<FrameSequence> corpus = load_corpus(sweep_corpus, config.source_fps);
        const ResolvedLabels labels = load_labels_for(sweep_corpus, sweep_labels);
        SweepResult result;
        if (sweep_axis == "edge") {
            result = sweep_values.empty()
                         ? sweep_edge_threshold(corpus, labels, config)
                         : sweep_edge_threshold(corpus, labels, config, sweep_values);
        } else if (sweep_axis == "grid") {
            result = sweep_values.empty() ? sweep_grid_size(corpus, labels, config)
                                          : sweep_grid_size(corpus, labels, config, sweep_values);
        } else {
            throw FormatError("--axis must be 'edge' or 'grid', got '" + sweep_axis + "'");
        }
        save_sweep_csv(result, sweep_out);
        std::cout << "wrote " << result.points.size() << " sweep points to " << sweep_out << '\n';
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
