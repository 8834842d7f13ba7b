#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "edgegrid/detail/text.hpp"
#include "edgegrid/errors.hpp"
#include "edgegrid/svm.hpp"

namespace edgegrid {

inline constexpr int kModelFormatVersion = 1;

namespace detail {

inline std::string next_line(std::istream& in, const std::string& context) {
    std::string line;
    while (std::getline(in, line)) {
        line = std::string(trim(line));
        if (!line.empty()) return line;
    }
    throw FormatError("unexpected end of model file while reading " + context);
}

inline std::vector<std::string> expect_fields(const std::string& line, const std::string& keyword,
                                              std::size_t field_count) {
    const auto views = split(line, ' ');
    if (views.size() != field_count || views[0] != keyword)
        throw FormatError("model file: expected '" + keyword + "' record, got '" + line + "'");
    std::vector<std::string> fields;  // own the storage; `line` may be a temporary
    fields.reserve(views.size());
    for (const auto& v : views) fields.emplace_back(v);
    return fields;
}

}  // namespace detail

/// Plain-text model format. All floating-point fields are written with
/// shortest round-trip formatting so save/load is lossless.
inline void save_model(const SVMModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");

    out << "edgegrid-model " << kModelFormatVersion << '\n';
    out << "classes " << model.classes.size() << '\n';
    for (const auto& name : model.classes) out << name << '\n';
    out << "gamma " << detail::fmt_double(model.gamma) << '\n';
    out << "c " << detail::fmt_double(model.c) << '\n';
    out << "subset " << model.subset.size() << '\n';
    for (int f : model.subset) out << f << '\n';
    out << "scaler " << model.scaler.mean.size() << '\n';
    for (std::size_t f = 0; f < model.scaler.mean.size(); ++f)
        out << detail::fmt_double(model.scaler.mean[f]) << ' '
            << detail::fmt_double(model.scaler.stddev[f]) << '\n';
    out << "machines " << model.machines.size() << '\n';
    for (const auto& machine : model.machines) {
        out << "machine " << machine.positive_class << ' ' << machine.negative_class << '\n';
        out << "bias " << detail::fmt_double(machine.bias) << '\n';
        out << "support_vectors " << machine.dual_coef.size() << '\n';
        for (std::size_t i = 0; i < machine.dual_coef.size(); ++i) {
            out << detail::fmt_double(machine.dual_coef[i]);
            for (double v : machine.support_vectors[i]) out << ' ' << detail::fmt_double(v);
            out << '\n';
        }
    }
    if (!out) throw IoError("short write to '" + path.string() + "'");
}

inline SVMModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");

    const auto header = detail::expect_fields(detail::next_line(in, "header"), "edgegrid-model", 2);
    const long version = detail::parse_long(header[1], "model version");
    if (version != kModelFormatVersion)
        throw FormatError("unsupported model version " + std::to_string(version));

    SVMModel model;
    const auto classes =
        detail::expect_fields(detail::next_line(in, "classes"), "classes", 2);
    const long class_count = detail::parse_long(classes[1], "class count");
    for (long i = 0; i < class_count; ++i)
        model.classes.push_back(detail::next_line(in, "class name"));

    model.gamma = detail::parse_double(
        detail::expect_fields(detail::next_line(in, "gamma"), "gamma", 2)[1], "gamma");
    model.c = detail::parse_double(
        detail::expect_fields(detail::next_line(in, "c"), "c", 2)[1], "c");

    const long subset_count = detail::parse_long(
        detail::expect_fields(detail::next_line(in, "subset"), "subset", 2)[1], "subset size");
    for (long i = 0; i < subset_count; ++i)
        model.subset.push_back(
            static_cast<int>(detail::parse_long(detail::next_line(in, "subset index"),
                                                "subset index")));

    const long scaler_dim = detail::parse_long(
        detail::expect_fields(detail::next_line(in, "scaler"), "scaler", 2)[1], "scaler size");
    if (scaler_dim != subset_count)
        throw FormatError("model file: scaler dimension does not match subset size");
    for (long f = 0; f < scaler_dim; ++f) {
        const std::string row = detail::next_line(in, "scaler row");
        const auto fields = detail::split(row, ' ');
        if (fields.size() != 2) throw FormatError("model file: malformed scaler row");
        model.scaler.mean.push_back(detail::parse_double(fields[0], "scaler mean"));
        model.scaler.stddev.push_back(detail::parse_double(fields[1], "scaler stddev"));
    }

    const long machine_count = detail::parse_long(
        detail::expect_fields(detail::next_line(in, "machines"), "machines", 2)[1],
        "machine count");
    for (long k = 0; k < machine_count; ++k) {
        const auto head =
            detail::expect_fields(detail::next_line(in, "machine"), "machine", 3);
        BinaryMachine machine;
        machine.positive_class = std::string(head[1]);
        machine.negative_class = std::string(head[2]);
        machine.bias = detail::parse_double(
            detail::expect_fields(detail::next_line(in, "bias"), "bias", 2)[1], "bias");
        machine.gamma_cache = model.gamma;
        const long sv_count = detail::parse_long(
            detail::expect_fields(detail::next_line(in, "support_vectors"), "support_vectors",
                                  2)[1],
            "support vector count");
        for (long i = 0; i < sv_count; ++i) {
            const std::string row = detail::next_line(in, "support vector");
            const auto fields = detail::split(row, ' ');
            if (fields.size() != static_cast<std::size_t>(scaler_dim) + 1)
                throw FormatError("model file: support vector row has wrong width");
            machine.dual_coef.push_back(detail::parse_double(fields[0], "dual coefficient"));
            std::vector<double> vec;
            for (std::size_t f = 1; f < fields.size(); ++f)
                vec.push_back(detail::parse_double(fields[f], "support vector value"));
            machine.support_vectors.push_back(std::move(vec));
        }
        model.machines.push_back(std::move(machine));
    }
    return model;
}

}  // namespace edgegrid
