// Acceptance gate for the full pipeline: one check per shipped guarantee,
// each with its tolerance and wall-clock budget pinned in code. Prints one
// [PASS]/[FAIL] line per check and exits nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "edgegrid/edgegrid.hpp"
#include "test_util.hpp"

using namespace edgegrid;

namespace {

void expect(bool condition, const std::string& message) {
    if (!condition) throw std::runtime_error(message);
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// 1. Feature dimension follows the grid: 2*g*d statics + 2*g*d velocities.

void check_feature_length() {
    GrayFrame frame(64, 64, 0.1f);
    for (int y = 20; y < 44; ++y)
        for (int x = 20; x < 44; ++x) frame.at(x, y) = 0.9f;
    Window window;
    window.sequence_id = "probe";
    window.frames = {frame, frame};

    for (int g : {5, 10, 20, 50}) {
        GridSpec spec;
        spec.g = g;
        const FeatureVector row = extract(window, EdgeParams{}, spec);
        const std::size_t want = static_cast<std::size_t>(4 * g * 5);
        expect(row.statics.size() == want / 2 && row.velocities.size() == want / 2,
               "grid " + std::to_string(g) + ": feature blocks are " +
                   std::to_string(row.statics.size()) + "+" +
                   std::to_string(row.velocities.size()) + ", want 2x" +
                   std::to_string(want / 2));
        expect(row.dimension() == want,
               "grid " + std::to_string(g) + ": dimension " + std::to_string(row.dimension()) +
                   ", want " + std::to_string(want));
    }
    const FeatureVector fallback = extract(window, EdgeParams{}, GridSpec{});
    expect(fallback.dimension() == 400,
           "default grid dimension " + std::to_string(fallback.dimension()) + ", want 400");
}

// ---------------------------------------------------------------------------
// 2. Slot occupancy matches a brute-force oracle exactly.

std::vector<double> occupancy_oracle(const EdgeMap& edges, const GridSpec& spec) {
    // Dilate the edge set by one pixel (Chebyshev) up front, then test sample
    // membership directly from the written formulas.
    std::set<std::pair<int, int>> near_edge;
    for (int y = 0; y < edges.height; ++y)
        for (int x = 0; x < edges.width; ++x)
            if (edges.at(x, y))
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) near_edge.insert({x + dx, y + dy});

    const auto half_down = [](double v) { return static_cast<int>(std::ceil(v - 0.5)); };
    const int n = spec.n_spacing > 0 ? spec.n_spacing : spec.g;
    const int q = n / spec.d;

    std::vector<double> slots(static_cast<std::size_t>(2 * spec.g * spec.d), 0.0);
    std::size_t flat = 0;
    for (int orientation = 0; orientation < 2; ++orientation) {
        const int across = orientation == 0 ? edges.height : edges.width;
        const int along_max = orientation == 0 ? edges.width : edges.height;
        for (int line = 0; line < spec.g; ++line) {
            const int fixed = half_down((line + 1) * static_cast<double>(across) / (spec.g + 1));
            for (int division = 0; division < spec.d; ++division, ++flat) {
                const int begin = division * q;
                const int end = division == spec.d - 1 ? n : begin + q;
                for (int k = begin; k < end; ++k) {
                    int along = half_down((k + 0.5) * static_cast<double>(along_max) / n);
                    along = std::min(std::max(along, 0), along_max - 1);
                    const int x = orientation == 0 ? along : fixed;
                    const int y = orientation == 0 ? fixed : along;
                    if (near_edge.count({x, y})) {
                        slots[flat] = 1.0;
                        break;
                    }
                }
            }
        }
    }
    return slots;
}

void check_occupancy_oracle() {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
        EdgeMap edges(64, 64);
        // Sparse salt plus a couple of structured strokes.
        for (int i = 0; i < 80; ++i)
            edges.set(static_cast<int>(detail::uniform_below(rng, 64)),
                      static_cast<int>(detail::uniform_below(rng, 64)));
        const int row = static_cast<int>(detail::uniform_below(rng, 64));
        for (int x = 10; x < 50; ++x) edges.set(x, row);
        const int col = static_cast<int>(detail::uniform_below(rng, 64));
        for (int y = 5; y < 30; ++y) edges.set(col, y);

        GridSpec spec;
        spec.g = 4 + static_cast<int>(detail::uniform_below(rng, 9));   // 4..12
        spec.d = 1 + static_cast<int>(detail::uniform_below(rng, 4));   // 1..4 <= g
        const std::vector<double> got = occupancy(edges, spec);
        const std::vector<double> want = occupancy_oracle(edges, spec);
        expect(got == want, "trial " + std::to_string(trial) + " (g=" + std::to_string(spec.g) +
                                ", d=" + std::to_string(spec.d) +
                                "): occupancy departs from the oracle");
    }
}

// ---------------------------------------------------------------------------
// 3. Edge detector invariants: silence on flat frames, monotone thresholds,
//    and a contour within 1 px of a known square.

GrayFrame blob_frame(std::mt19937_64& rng) {
    GrayFrame frame(64, 64, 0.2f);
    const int blobs = 2 + static_cast<int>(detail::uniform_below(rng, 3));
    for (int b = 0; b < blobs; ++b) {
        const int cx = 8 + static_cast<int>(detail::uniform_below(rng, 48));
        const int cy = 8 + static_cast<int>(detail::uniform_below(rng, 48));
        const int r = 3 + static_cast<int>(detail::uniform_below(rng, 8));
        const float level = 0.5f + 0.5f * static_cast<float>(detail::uniform01(rng));
        for (int y = std::max(0, cy - r); y < std::min(64, cy + r); ++y)
            for (int x = std::max(0, cx - r); x < std::min(64, cx + r); ++x)
                if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) frame.at(x, y) = level;
    }
    return frame;
}

double segment_distance(double px, double py, double x0, double y0, double x1, double y1) {
    const double vx = x1 - x0, vy = y1 - y0;
    const double len2 = vx * vx + vy * vy;
    double t = len2 > 0.0 ? ((px - x0) * vx + (py - y0) * vy) / len2 : 0.0;
    t = std::min(1.0, std::max(0.0, t));
    const double dx = px - (x0 + t * vx), dy = py - (y0 + t * vy);
    return std::sqrt(dx * dx + dy * dy);
}

void check_canny_invariants() {
    for (float level : {0.0f, 0.37f, 1.0f}) {
        const GrayFrame flat(64, 64, level);
        expect(canny(flat, EdgeParams{}).edge_count() == 0,
               "flat frame at " + fmt(level) + " produced edges");
    }

    std::mt19937_64 rng(7);
    const std::vector<double> thresholds = {0.2, 0.4, 0.6, 0.8};
    for (int trial = 0; trial < 50; ++trial) {
        const GrayFrame frame = blob_frame(rng);
        EdgeMap previous;
        for (std::size_t i = 0; i < thresholds.size(); ++i) {
            EdgeParams params;
            params.threshold_t = thresholds[i];
            const EdgeMap current = canny(frame, params);
            if (i > 0) {
                expect(current.edge_count() <= previous.edge_count(),
                       "edge count grew when the threshold rose (trial " +
                           std::to_string(trial) + ")");
                for (std::size_t p = 0; p < current.data.size(); ++p)
                    expect(!current.data[p] || previous.data[p],
                           "higher threshold produced a pixel the lower one lacked (trial " +
                               std::to_string(trial) + ")");
            }
            previous = current;
        }
    }

    // Square of known geometry: intensity steps midway between pixels 15|16
    // and 47|48, so the true contour is the rectangle through 15.5 .. 47.5.
    GrayFrame square(64, 64, 0.1f);
    for (int y = 16; y < 48; ++y)
        for (int x = 16; x < 48; ++x) square.at(x, y) = 0.9f;
    const EdgeMap edges = canny(square, EdgeParams{});
    expect(edges.edge_count() > 0, "square frame produced no edges");

    const double lo = 15.5, hi = 47.5, tolerance = 1.0 + 1e-9;
    std::vector<std::pair<double, double>> edge_points;
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x)
            if (edges.at(x, y)) edge_points.push_back({x, y});
    for (const auto& [x, y] : edge_points) {
        const double d = std::min(
            std::min(segment_distance(x, y, lo, lo, hi, lo), segment_distance(x, y, lo, hi, hi, hi)),
            std::min(segment_distance(x, y, lo, lo, lo, hi), segment_distance(x, y, hi, lo, hi, hi)));
        expect(d <= tolerance, "edge pixel (" + fmt(x) + "," + fmt(y) + ") sits " + fmt(d) +
                                   " px from the true contour");
    }
    for (double s = lo; s <= hi; s += 0.25)
        for (const auto& [px, py] : std::vector<std::pair<double, double>>{
                 {s, lo}, {s, hi}, {lo, s}, {hi, s}}) {
            double best = 1e9;
            for (const auto& [x, y] : edge_points)
                best = std::min(best, std::hypot(x - px, y - py));
            expect(best <= tolerance, "contour point (" + fmt(px) + "," + fmt(py) +
                                          ") has no edge pixel within " + fmt(best) + " px");
        }
}

// ---------------------------------------------------------------------------
// 4. The binary trainer solves XOR and lands in the feasible dual region.

void check_smo_xor() {
    std::mt19937_64 rng(42);
    std::vector<std::vector<double>> rows;
    std::vector<int> y;
    for (int i = 0; i < 200; ++i) {
        const auto coord = [&rng]() {
            const double u = detail::uniform01(rng);
            return u < 0.5 ? u * 0.9 : 0.55 + (u - 0.5) * 0.9;  // keep off the 0.5 boundary
        };
        const double a = coord(), b = coord();
        rows.push_back({a, b});
        y.push_back(((a < 0.5) != (b < 0.5)) ? 1 : -1);
    }

    const double gamma = 8.0, c = 10.0;
    SmoOptions options;
    options.seed = 42;
    const SmoResult result = smo_train(rows, y, gamma, c, options);

    double alpha_dot_y = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        expect(result.alphas[i] >= -1e-12 && result.alphas[i] <= c + 1e-12,
               "alpha[" + std::to_string(i) + "] = " + fmt(result.alphas[i]) +
                   " leaves [0, c]");
        alpha_dot_y += result.alphas[i] * y[i];
    }
    expect(std::abs(alpha_dot_y) <= 1e-3,
           "sum alpha_i y_i = " + fmt(alpha_dot_y) + " exceeds 1e-3");

    const auto decision = [&](const std::vector<double>& x) {
        double f = result.bias;
        for (std::size_t j = 0; j < rows.size(); ++j)
            if (result.alphas[j] != 0.0) f += result.alphas[j] * y[j] * rbf(rows[j], x, gamma);
        return f;
    };

    int correct = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double f = decision(rows[i]);
        if ((f >= 0 ? 1 : -1) == y[i]) ++correct;
        if (result.alphas[i] > 1e-6 && result.alphas[i] < c - 1e-6)
            expect(std::abs(y[i] * f - 1.0) <= 1e-2,
                   "free support vector " + std::to_string(i) + " has margin residual " +
                       fmt(std::abs(y[i] * f - 1.0)));
    }
    expect(correct == 200, "trained XOR accuracy " + std::to_string(correct) + "/200");
}

// ---------------------------------------------------------------------------
// 5. Best-first subset search recovers the exhaustive optimum on small
//    problems.

FeatureTable random_selection_table(std::mt19937_64& rng) {
    const char* labels[3] = {"anger", "happy", "sad"};
    FeatureTable table;
    for (int c = 0; c < 3; ++c)
        for (int s = 0; s < 20; ++s) {
            FeatureVector row;
            row.sequence_id = "r" + std::to_string(c) + "_" + std::to_string(s);
            row.label = labels[c];
            row.statics.resize(10);
            // Features 0-2 informative, 3-4 noisy copies, 5-9 noise.
            row.statics[0] = c + detail::uniform_range(rng, -0.4, 0.4);
            row.statics[1] = (c == 1 ? 1.0 : 0.0) + detail::uniform_range(rng, -0.3, 0.3);
            row.statics[2] = (c == 2 ? 1.0 : 0.0) + detail::uniform_range(rng, -0.5, 0.5);
            row.statics[3] = row.statics[0] + detail::uniform_range(rng, -0.2, 0.2);
            row.statics[4] = row.statics[1] + detail::uniform_range(rng, -0.6, 0.6);
            for (int f = 5; f < 10; ++f) row.statics[f] = detail::uniform_range(rng, 0.0, 1.0);
            table.rows.push_back(std::move(row));
        }
    return table;
}

void check_best_first_vs_exhaustive() {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const FeatureTable table = random_selection_table(rng);

        double best_merit = 0.0;
        for (unsigned mask = 1; mask < (1u << 10); ++mask) {
            FeatureSubset subset;
            for (int f = 0; f < 10; ++f)
                if (mask & (1u << f)) subset.indices.push_back(f);
            best_merit = std::max(best_merit, cfs_merit(subset, table));
        }

        const FeatureSubset found = best_first_select(table);
        expect(std::abs(found.merit - cfs_merit(found, table)) <= 1e-12,
               "reported merit disagrees with a direct recomputation");
        expect(std::abs(found.merit - best_merit) <= 1e-9,
               "trial " + std::to_string(trial) + ": best-first merit " + fmt(found.merit) +
                   " vs exhaustive " + fmt(best_merit));
    }
}

// ---------------------------------------------------------------------------
// 6. End-to-end on the bundled generator: 70/30 grouped split, default
//    configuration, strong held-out scores.

void check_end_to_end() {
    testutil::TempDir tmp;
    SynthConfig synth_config;
    synth_config.sequences_per_class = 10;
    synth_config.frames = 24;
    synth_config.seed = 0;
    generate_synthetic(tmp.path(), default_class_specs(), synth_config);

    RunConfig config;  // defaults throughout
    const PipelineResult result = run_pipeline(tmp.path(), config);

    const double overall = result.matrix.overall_accuracy();
    expect(overall >= 0.85, "held-out accuracy " + fmt(overall) + " < 0.85");
    for (std::size_t r = 0; r < ConfusionMatrix::kSize; ++r) {
        expect(result.matrix.support(r) == 3,
               std::string(kClassOrder[r]) + " has test support " +
                   std::to_string(result.matrix.support(r)) + ", want 3");
        expect(result.matrix.recall(r) >= 0.6,
               std::string(kClassOrder[r]) + " recall " + fmt(result.matrix.recall(r)) +
                   " < 0.6");
    }
}

// ---------------------------------------------------------------------------
// 7. Sweeps: a full pipeline per point, reproducible byte for byte, with the
//    feature dimension obeying the grid at every point.

void check_sweeps() {
    testutil::TempDir tmp;
    SynthConfig synth_config;
    synth_config.sequences_per_class = 3;
    synth_config.frames = 24;
    synth_config.seed = 1;
    generate_synthetic(tmp.path(), default_class_specs(), synth_config);

    const std::vector<FrameSequence> corpus = load_corpus(tmp.path());
    const ResolvedLabels labels = resolve_labels(load_annotations_csv(tmp.path() / "labels.csv"));
    RunConfig config;

    const SweepResult edge = sweep_edge_threshold(corpus, labels, config, {0.5, 0.3});
    expect(edge.points.size() == 2 && edge.points[0].param == 0.3 && edge.points[1].param == 0.5,
           "edge sweep did not sort its two thresholds");
    for (const auto& point : edge.points)
        expect(point.feature_dimension == 400,
               "edge sweep point at " + fmt(point.param) + " has dimension " +
                   std::to_string(point.feature_dimension) + ", want 400 (fixed grid 20)");

    const SweepResult grid = sweep_grid_size(corpus, labels, config, {5, 10});
    for (const auto& point : grid.points) {
        const std::size_t want = static_cast<std::size_t>(4 * point.param * 5);
        expect(point.feature_dimension == want,
               "grid sweep point at " + fmt(point.param) + " has dimension " +
                   std::to_string(point.feature_dimension) + ", want " + std::to_string(want));
    }

    const SweepResult edge_again = sweep_edge_threshold(corpus, labels, config, {0.5, 0.3});
    save_sweep_csv(edge, tmp / "sweep_a.csv");
    save_sweep_csv(edge_again, tmp / "sweep_b.csv");
    expect(testutil::slurp(tmp / "sweep_a.csv") == testutil::slurp(tmp / "sweep_b.csv"),
           "re-running the identical sweep changed the output bytes");
}

// ---------------------------------------------------------------------------
// 8. Partition laws: splits and folds are exhaustive, disjoint, and never
//    separate windows of one sequence; confusion rows normalize to one.

void check_partition_laws() {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        const int classes = 2 + static_cast<int>(detail::uniform_below(rng, 3));
        const int seqs = 2 + static_cast<int>(detail::uniform_below(rng, 5));
        const int wins = 1 + static_cast<int>(detail::uniform_below(rng, 3));

        FeatureTable table;
        const char* names[5] = {"anger", "happy", "sad", "fear", "disgust"};
        for (int c = 0; c < classes; ++c)
            for (int s = 0; s < seqs; ++s)
                for (int w = 0; w < wins; ++w) {
                    FeatureVector row;
                    row.sequence_id = std::string(names[c]) + "_" + std::to_string(s);
                    row.start_index = w;
                    row.statics = {detail::uniform01(rng)};
                    row.label = names[c];
                    table.rows.push_back(std::move(row));
                }

        const auto [train, test] = split(table, 0.7, trial);
        expect(train.rows.size() + test.rows.size() == table.rows.size(),
               "split dropped or duplicated rows");
        std::set<std::string> train_ids, test_ids;
        for (const auto& r : train.rows) train_ids.insert(r.sequence_id);
        for (const auto& r : test.rows) test_ids.insert(r.sequence_id);
        for (const auto& id : test_ids)
            expect(!train_ids.count(id), "sequence " + id + " straddles the split");

        const int k = 2;
        const auto folds = kfold(train, k, trial);
        std::set<std::size_t> seen;
        std::map<std::string, std::size_t> owner;
        for (std::size_t f = 0; f < folds.size(); ++f)
            for (std::size_t r : folds[f]) {
                expect(r < train.rows.size(), "fold index out of range");
                expect(seen.insert(r).second, "row assigned to two folds");
                const auto [it, inserted] = owner.emplace(train.rows[r].sequence_id, f);
                expect(inserted || it->second == f,
                       "sequence " + train.rows[r].sequence_id + " straddles folds");
            }
        expect(seen.size() == train.rows.size(), "folds do not cover the training rows");

        ConfusionMatrix m;
        for (int i = 0; i < 20; ++i)
            m.add(names[detail::uniform_below(rng, static_cast<std::uint64_t>(classes))],
                  names[detail::uniform_below(rng, static_cast<std::uint64_t>(classes))],
                  1 + static_cast<long long>(detail::uniform_below(rng, 100)));
        const auto normalized = m.normalized();
        for (std::size_t r = 0; r < ConfusionMatrix::kSize; ++r) {
            if (m.support(r) == 0) continue;
            double sum = 0.0;
            for (double v : normalized[r]) sum += v;
            expect(std::abs(sum - 1.0) <= 1e-9,
                   "row " + std::string(kClassOrder[r]) + " sums to " + fmt(sum));
        }
    }

    FeatureTable too_small;
    FeatureVector row;
    row.sequence_id = "only";
    row.statics = {0.0};
    row.label = "anger";
    too_small.rows.push_back(row);
    bool threw = false;
    try {
        kfold(too_small, 2, 0);
    } catch (const PartitionError&) {
        threw = true;
    }
    expect(threw, "k-fold accepted fewer groups than folds");
}

// ---------------------------------------------------------------------------
// 9. The bundled reference matrix reproduces its published headline numbers.

void check_reference_fixture() {
    const auto pairs = load_pairs_csv(std::filesystem::path(EDGEGRID_FIXTURE_DIR) /
                                      "reference_confusion.csv");
    const ConfusionMatrix m = confusion_from_pairs(pairs);
    const double overall = m.overall_accuracy();
    expect(std::abs(overall - 0.709) <= 0.001,
           "overall accuracy " + fmt(overall) + " misses 0.709 +/- 0.001");
    const double happy = m.recall(ConfusionMatrix::index_of("happy"));
    expect(happy == 0.766, "happy recall " + fmt(happy) + " != 0.766");
    for (std::size_t r = 0; r < ConfusionMatrix::kSize; ++r)
        expect(m.support(r) == 1000, std::string(kClassOrder[r]) + " support " +
                                         std::to_string(m.support(r)) + " != 1000");
}

// ---------------------------------------------------------------------------

struct Check {
    int number;
    std::string description;
    double budget_seconds;
    std::function<void()> body;
};

}  // namespace

int main() {
    const std::vector<Check> checks = {
        {1, "feature dimension follows 4*g*d across grid sizes", 1.0, check_feature_length},
        {2, "slot occupancy matches the brute-force oracle on 100 random maps", 5.0,
         check_occupancy_oracle},
        {3, "edge detector: flat-frame silence, monotone thresholds, square within 1 px", 10.0,
         check_canny_invariants},
        {4, "binary trainer solves XOR with a feasible dual solution", 5.0, check_smo_xor},
        {5, "best-first subset search matches exhaustive enumeration (20 runs)", 30.0,
         check_best_first_vs_exhaustive},
        {6, "end-to-end generated corpus scores >= 0.85 overall, >= 0.6 per class", 120.0,
         check_end_to_end},
        {7, "sweeps reproduce byte-identically and obey the dimension law", 600.0, check_sweeps},
        {8, "splits and folds partition cleanly; confusion rows normalize", 30.0,
         check_partition_laws},
        {9, "reference matrix scores 0.709 +/- 0.001 overall, 0.766 happy recall", 1.0,
         check_reference_fixture},
    };

    int failures = 0;
    for (const auto& check : checks) {
        const auto start = std::chrono::steady_clock::now();
        std::string error;
        try {
            check.body();
        } catch (const std::exception& e) {
            error = e.what();
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (error.empty() && elapsed > check.budget_seconds)
            error = "exceeded the time budget";
        std::printf("[%s] %d. %s (%.2fs, budget %.0fs)%s%s\n", error.empty() ? "PASS" : "FAIL",
                    check.number, check.description.c_str(), elapsed,
                    check.budget_seconds, error.empty() ? "" : ": ", error.c_str());
        if (!error.empty()) ++failures;
    }

    if (failures > 0) std::printf("%d of %zu checks failed\n", failures, checks.size());
    return failures == 0 ? 0 : 1;
}
