#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "caadam/linalg.hpp"

namespace caadam {

enum class Task { regression, classification };

std::string_view to_string(Task task);

/// Features plus one target column. For classification the target column
/// holds integer class indices.
struct Dataset {
    Matrix features;
    Matrix targets;
    Task task = Task::regression;
    std::vector<std::string> feature_names;
    std::string target_name = "target";
    std::size_t num_classes = 0;  // classification only

    std::size_t size() const noexcept { return features.rows(); }
    std::size_t num_features() const noexcept { return features.cols(); }
    /// Rows selected by index, keeping metadata.
    Dataset subset(std::span<const std::size_t> rows) const;
};

struct CsvSchema {
    std::string target_column;
    Task task = Task::regression;
};

/// Reads a comma-separated file with a header row. Every cell must parse as a
/// number; failures raise DataError naming the 1-based data row and column.
Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema);

/// Writes features followed by the target column, shortest round-trip
/// formatting.
void write_csv(const Dataset& ds, const std::filesystem::path& path);

struct Standardization {
    std::vector<double> mean;
    std::vector<double> std;

    Matrix apply(const Matrix& features) const;
};

struct SplitDataset {
    Dataset train;
    Dataset validation;
    Dataset test;
    Standardization standardization;
};

using SplitFractions = std::array<double, 3>;
inline constexpr SplitFractions kDefaultSplit = {0.64, 0.16, 0.20};
inline constexpr double kStdFloor = 1e-8;

/// Seeded shuffle, then contiguous train/validation/test partitions of sizes
/// floor(n*f_train), floor(n*f_val) and the remainder. Features are
/// standardized with statistics from the train partition only (population
/// standard deviation, floored at kStdFloor). Targets are left untouched.
SplitDataset split_standardize(const Dataset& ds, const SplitFractions& fractions, std::uint64_t seed);

/// Partition sizes used by split_standardize.
std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitFractions& fractions);

/// Synthetic regression set. Features are uniform on [0, 1); the target is
/// synth_regression_target(x) plus N(0, noise_std^2) noise.
Dataset synth_regression(std::size_t n, std::size_t m, double noise_std, std::uint64_t seed);

/// Noise-free target of synth_regression, for a feature row of width m >= 1:
///
///   f(x) = sin(pi * x0 * x1) + 2 * (x2 - 0.5)^2 + sum_{j=3}^{m-1} x_j / (j - 1)
///
/// where indices beyond m - 1 wrap around modulo m.
double synth_regression_target(std::span<const double> x);

/// Gaussian blobs: `classes` centers drawn uniformly from [-3, 3]^m, samples
/// assigned round-robin and perturbed by N(0, spread^2) per coordinate.
Dataset synth_classification(std::size_t n, std::size_t m, std::size_t classes, double spread, std::uint64_t seed);

}  // namespace caadam
