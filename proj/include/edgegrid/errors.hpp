#pragma once

#include <stdexcept>
#include <string>

namespace edgegrid {

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionError : std::runtime_error {
    explicit DimensionError(const std::string& what) : std::runtime_error(what) {}
};

struct DegenerateDataError : std::runtime_error {
    explicit DegenerateDataError(const std::string& what) : std::runtime_error(what) {}
};

struct PartitionError : std::runtime_error {
    explicit PartitionError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace edgegrid
