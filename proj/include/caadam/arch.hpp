#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "caadam/nn.hpp"

namespace caadam {

struct LayerInfo {
    std::size_t index = 0;        // zero-based depth among trainable layers
    std::size_t connections = 0;  // fan_in * fan_out, biases excluded

    friend bool operator==(const LayerInfo&, const LayerInfo&) = default;
};

/// Structural statistics of a linear chain of dense layers.
struct ArchitectureSummary {
    std::vector<LayerInfo> layers;
    std::size_t c_min = 0;
    std::size_t c_max = 0;
    double c_median = 0.0;
    std::size_t depth = 0;  // number of trainable layers

    friend bool operator==(const ArchitectureSummary&, const ArchitectureSummary&) = default;
};

/// Summary built from per-layer connection counts in forward order.
/// Throws StructuralError on an empty list or a zero count.
ArchitectureSummary summarize(std::span<const std::size_t> connections);

ArchitectureSummary summarize(const Network& net);
ArchitectureSummary summarize(const NetworkSpec& spec);

/// Median with the even-length rule (mean of the two central values).
double median(std::vector<std::size_t> values);

}  // namespace caadam
