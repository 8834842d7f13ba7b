#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "edgegrid/detail/rng.hpp"
#include "edgegrid/errors.hpp"
#include "edgegrid/features.hpp"
#include "edgegrid/labels.hpp"
#include "edgegrid/select.hpp"

namespace edgegrid {

struct KernelParams {
    double gamma = 0.0;  // <= 0 means auto: 1 / (number of features used)
    double c = 0.4;      // box constraint on the dual coefficients

    void validate() const {
        if (c <= 0.0) throw DimensionError("slack penalty c must be positive");
    }

    double resolved_gamma(std::size_t dimension) const {
        if (gamma > 0.0) return gamma;
        if (dimension == 0) throw DimensionError("cannot derive gamma for zero features");
        return 1.0 / static_cast<double>(dimension);
    }
};

inline double rbf(const std::vector<double>& a, const std::vector<double>& b, double gamma) {
    if (a.size() != b.size()) throw DimensionError("rbf operands differ in dimension");
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        d2 += d * d;
    }
    return std::exp(-gamma * d2);
}

/// Per-feature standardization fitted on training data. Zero-variance
/// features keep scale 1 so they pass through centered.
struct FeatureScaler {
    std::vector<double> mean;
    std::vector<double> stddev;

    static FeatureScaler fit(const std::vector<std::vector<double>>& rows) {
        if (rows.empty()) throw DegenerateDataError("cannot fit scaler on empty data");
        const std::size_t dim = rows[0].size();
        FeatureScaler s;
        s.mean.assign(dim, 0.0);
        s.stddev.assign(dim, 0.0);
        for (const auto& row : rows) {
            if (row.size() != dim) throw DimensionError("inconsistent row dimension");
            for (std::size_t f = 0; f < dim; ++f) s.mean[f] += row[f];
        }
        for (double& m : s.mean) m /= static_cast<double>(rows.size());
        for (const auto& row : rows)
            for (std::size_t f = 0; f < dim; ++f) {
                const double d = row[f] - s.mean[f];
                s.stddev[f] += d * d;
            }
        for (double& v : s.stddev) {
            v = std::sqrt(v / static_cast<double>(rows.size()));
            if (v <= 0.0) v = 1.0;
        }
        return s;
    }

    std::vector<double> transform(const std::vector<double>& row) const {
        if (row.size() != mean.size()) throw DimensionError("scaler dimension mismatch");
        std::vector<double> out(row.size());
        for (std::size_t f = 0; f < row.size(); ++f) out[f] = (row[f] - mean[f]) / stddev[f];
        return out;
    }
};

struct SmoOptions {
    double tol = 1e-3;          // KKT violation tolerance
    int max_passes = 10;        // consecutive clean sweeps before stopping
    std::uint64_t seed = 0;     // drives the randomized second-index choice
    bool track_objective = false;
};

/// Raw output of the binary trainer: one dual coefficient per training row.
struct SmoResult {
    std::vector<double> alphas;
    double bias = 0.0;
    std::vector<double> objective_trace;  // filled when track_objective is set
};

namespace detail {

inline double dual_objective(const std::vector<double>& alphas, const std::vector<int>& y,
                             const std::vector<std::vector<double>>& gram) {
    const std::size_t m = alphas.size();
    double sum = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        sum += alphas[i];
        if (alphas[i] == 0.0) continue;
        for (std::size_t j = 0; j < m; ++j) {
            if (alphas[j] == 0.0) continue;
            quad += alphas[i] * alphas[j] * y[i] * y[j] * gram[i][j];
        }
    }
    return sum - 0.5 * quad;
}

}  // namespace detail

/// Sequential minimal optimization for a soft-margin kernel SVM.
/// rows must already be scaled; y entries are +1 or -1.
inline SmoResult smo_train(const std::vector<std::vector<double>>& rows, const std::vector<int>& y,
                           double gamma, double c, const SmoOptions& options = {}) {
    const std::size_t m = rows.size();
    if (m < 2) throw DegenerateDataError("binary training needs at least 2 rows");
    if (y.size() != m) throw DimensionError("label count does not match row count");
    bool pos = false, neg = false;
    for (int label : y) {
        if (label == 1) pos = true;
        else if (label == -1) neg = true;
        else throw DimensionError("binary labels must be +1 or -1");
    }
    if (!pos || !neg) throw DegenerateDataError("binary training needs both classes");

    std::vector<std::vector<double>> gram(m, std::vector<double>(m));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i; j < m; ++j) gram[i][j] = gram[j][i] = rbf(rows[i], rows[j], gamma);

    SmoResult result;
    result.alphas.assign(m, 0.0);
    std::vector<double>& a = result.alphas;
    double& b = result.bias;

    const auto decide = [&](std::size_t k) {
        double f = b;
        for (std::size_t i = 0; i < m; ++i)
            if (a[i] != 0.0) f += a[i] * y[i] * gram[i][k];
        return f;
    };

    std::mt19937_64 rng(detail::mix_seed(options.seed, 0x534d4f));
    if (options.track_objective)
        result.objective_trace.push_back(detail::dual_objective(a, y, gram));

    // Analytic two-variable update; returns false when the pair cannot move.
    const auto take_step = [&](std::size_t i, std::size_t j, double ei) -> bool {
        if (i == j) return false;
        const double ej = decide(j) - y[j];
        const double ai_old = a[i], aj_old = a[j];
        double lo, hi;
        if (y[i] != y[j]) {
            lo = std::max(0.0, aj_old - ai_old);
            hi = std::min(c, c + aj_old - ai_old);
        } else {
            lo = std::max(0.0, ai_old + aj_old - c);
            hi = std::min(c, ai_old + aj_old);
        }
        if (lo >= hi) return false;

        const double eta = 2.0 * gram[i][j] - gram[i][i] - gram[j][j];
        if (eta >= 0.0) return false;

        double aj = aj_old - y[j] * (ei - ej) / eta;
        aj = std::min(hi, std::max(lo, aj));
        if (std::abs(aj - aj_old) < 1e-5) return false;
        const double ai = ai_old + y[i] * y[j] * (aj_old - aj);

        a[i] = ai;
        a[j] = aj;
        const double b1 = b - ei - y[i] * (ai - ai_old) * gram[i][i] -
                          y[j] * (aj - aj_old) * gram[i][j];
        const double b2 = b - ej - y[i] * (ai - ai_old) * gram[i][j] -
                          y[j] * (aj - aj_old) * gram[j][j];
        if (ai > 0.0 && ai < c) b = b1;
        else if (aj > 0.0 && aj < c) b = b2;
        else b = 0.5 * (b1 + b2);

        if (options.track_objective)
            result.objective_trace.push_back(detail::dual_objective(a, y, gram));
        return true;
    };

    int clean_sweeps = 0;
    while (clean_sweeps < options.max_passes) {
        int changed = 0;
        for (std::size_t i = 0; i < m; ++i) {
            const double ei = decide(i) - y[i];
            const bool violates = (y[i] * ei < -options.tol && a[i] < c) ||
                                  (y[i] * ei > options.tol && a[i] > 0.0);
            if (!violates) continue;

            // Second-choice heuristic: the non-bound partner with the largest
            // error gap allows the biggest analytic step.
            std::size_t best = m;
            double best_gap = -1.0;
            for (std::size_t k = 0; k < m; ++k) {
                if (k == i || a[k] <= 0.0 || a[k] >= c) continue;
                const double gap = std::abs(ei - (decide(k) - y[k]));
                if (gap > best_gap) {
                    best_gap = gap;
                    best = k;
                }
            }
            bool stepped = best < m && take_step(i, best, ei);
            // Fall back to scanning every index from a random start so a
            // violating point is never abandoned while progress is possible.
            if (!stepped) {
                const std::size_t start = detail::uniform_below(rng, m);
                for (std::size_t off = 0; off < m && !stepped; ++off)
                    stepped = take_step(i, (start + off) % m, ei);
            }
            if (stepped) ++changed;
        }
        clean_sweeps = (changed == 0) ? clean_sweeps + 1 : 0;
    }

    // Every free support vector sits on the margin and therefore implies the
    // bias exactly; averaging them centers the residual spread around zero.
    // Coefficients within dust of a bound are excluded: they are numerically
    // bound points, not margin witnesses, and their implied bias is arbitrary.
    double implied = 0.0;
    int free_count = 0;
    for (std::size_t k = 0; k < m; ++k) {
        if (a[k] <= 1e-6 || a[k] >= c - 1e-6) continue;
        implied += y[k] - (decide(k) - b);
        ++free_count;
    }
    if (free_count > 0) b = implied / static_cast<double>(free_count);
    return result;
}

/// One binary decision surface from the one-vs-one decomposition. A
/// non-negative decision value votes for positive_class.
struct BinaryMachine {
    std::string positive_class;
    std::string negative_class;
    double bias = 0.0;
    std::vector<double> dual_coef;  // alpha_i * y_i per support vector
    std::vector<std::vector<double>> support_vectors;  // scaled, subset space

    double decide(const std::vector<double>& scaled) const {
        double f = bias;
        for (std::size_t i = 0; i < dual_coef.size(); ++i) {
            double d2 = 0.0;
            for (std::size_t f2 = 0; f2 < scaled.size(); ++f2) {
                const double d = support_vectors[i][f2] - scaled[f2];
                d2 += d * d;
            }
            f += dual_coef[i] * std::exp(-gamma_cache * d2);
        }
        return f;
    }

    double gamma_cache = 0.0;  // set by the owning model
};

struct Prediction {
    std::string label;
    std::vector<int> votes;             // aligned with SVMModel::classes
    std::vector<double> decision_sums;  // summed |decision| of won votes
};

/// A trained multiclass model: feature subset, scaler, and one machine per
/// unordered class pair.
struct SVMModel {
    std::vector<std::string> classes;  // canonical presentation order
    double gamma = 0.0;
    double c = 0.4;
    std::vector<int> subset;  // indices into the full feature vector
    FeatureScaler scaler;
    std::vector<BinaryMachine> machines;

    std::vector<double> reduce(const std::vector<double>& full) const {
        std::vector<double> out;
        out.reserve(subset.size());
        for (int f : subset) {
            if (f < 0 || static_cast<std::size_t>(f) >= full.size())
                throw DimensionError("feature vector shorter than model subset");
            out.push_back(full[static_cast<std::size_t>(f)]);
        }
        return out;
    }

    Prediction predict_full(const std::vector<double>& full) const {
        const std::vector<double> scaled = scaler.transform(reduce(full));
        Prediction p;
        p.votes.assign(classes.size(), 0);
        p.decision_sums.assign(classes.size(), 0.0);
        for (const auto& machine : machines) {
            const double d = machine.decide(scaled);
            const std::string& winner = d >= 0.0 ? machine.positive_class : machine.negative_class;
            const auto it = std::find(classes.begin(), classes.end(), winner);
            const std::size_t k = static_cast<std::size_t>(it - classes.begin());
            p.votes[k] += 1;
            p.decision_sums[k] += std::abs(d);
        }
        // Majority vote; ties fall back to the larger summed decision margin,
        // then to the fixed preference order.
        std::size_t best = 0;
        for (std::size_t k = 1; k < classes.size(); ++k) {
            if (p.votes[k] != p.votes[best]) {
                if (p.votes[k] > p.votes[best]) best = k;
                continue;
            }
            if (p.decision_sums[k] != p.decision_sums[best]) {
                if (p.decision_sums[k] > p.decision_sums[best]) best = k;
                continue;
            }
            if (vote_rank(classes[k]) < vote_rank(classes[best])) best = k;
        }
        p.label = classes[best];
        return p;
    }

    std::string predict(const FeatureVector& row) const { return predict_full(row.full()).label; }
};

namespace detail {

inline std::vector<std::string> present_classes(const FeatureTable& table) {
    std::vector<std::string> classes = table.distinct_labels();
    std::sort(classes.begin(), classes.end(), [](const std::string& a, const std::string& b) {
        const std::size_t ra = class_rank(a), rb = class_rank(b);
        if (ra != rb) return ra < rb;
        return a < b;
    });
    return classes;
}

}  // namespace detail

/// Trains one machine per class pair on the subset-reduced, standardized
/// features. Classes absent from the data are reported through `warnings`.
inline SVMModel ovo_train(const FeatureTable& table, const FeatureSubset& subset,
                          KernelParams params, const SmoOptions& options = {},
                          std::vector<std::string>* warnings = nullptr) {
    table.validate();
    params.validate();
    if (subset.indices.empty()) throw DegenerateDataError("cannot train on an empty subset");

    SVMModel model;
    model.classes = detail::present_classes(table);
    if (model.classes.size() < 2)
        throw DegenerateDataError("training needs at least 2 classes, got " +
                                  std::to_string(model.classes.size()));
    if (warnings) {
        for (const auto& expected : kClassOrder)
            if (std::find(model.classes.begin(), model.classes.end(), expected) ==
                model.classes.end())
                warnings->push_back("class '" + std::string(expected) +
                                    "' absent from training data");
    }

    model.subset = subset.indices;
    model.gamma = params.resolved_gamma(subset.indices.size());
    model.c = params.c;

    std::vector<std::vector<double>> reduced;
    reduced.reserve(table.rows.size());
    for (const auto& row : table.rows) reduced.push_back(model.reduce(row.full()));
    model.scaler = FeatureScaler::fit(reduced);
    for (auto& row : reduced) row = model.scaler.transform(row);

    std::uint64_t pair_index = 0;
    for (std::size_t i = 0; i < model.classes.size(); ++i) {
        for (std::size_t j = i + 1; j < model.classes.size(); ++j, ++pair_index) {
            const std::string& pos = model.classes[i];
            const std::string& neg = model.classes[j];
            std::vector<std::vector<double>> rows;
            std::vector<int> y;
            for (std::size_t r = 0; r < table.rows.size(); ++r) {
                if (table.rows[r].label == pos) {
                    rows.push_back(reduced[r]);
                    y.push_back(1);
                } else if (table.rows[r].label == neg) {
                    rows.push_back(reduced[r]);
                    y.push_back(-1);
                }
            }
            SmoOptions pair_options = options;
            pair_options.seed = detail::mix_seed(options.seed, pair_index + 1);
            const SmoResult fit = smo_train(rows, y, model.gamma, model.c, pair_options);

            BinaryMachine machine;
            machine.positive_class = pos;
            machine.negative_class = neg;
            machine.bias = fit.bias;
            machine.gamma_cache = model.gamma;
            for (std::size_t r = 0; r < rows.size(); ++r) {
                if (fit.alphas[r] == 0.0) continue;
                machine.dual_coef.push_back(fit.alphas[r] * y[r]);
                machine.support_vectors.push_back(rows[r]);
            }
            model.machines.push_back(std::move(machine));
        }
    }
    return model;
}

}  // namespace edgegrid
