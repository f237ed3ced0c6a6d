#include "caadam/arch.hpp"

#include <algorithm>

#include "caadam/error.hpp"

namespace caadam {

double median(std::vector<std::size_t> values) {
    if (values.empty()) throw StructuralError("median of an empty list");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return static_cast<double>(values[n / 2]);
    return (static_cast<double>(values[n / 2 - 1]) + static_cast<double>(values[n / 2])) / 2.0;
}

ArchitectureSummary summarize(std::span<const std::size_t> connections) {
    if (connections.empty()) throw StructuralError("network has no trainable layers");
    ArchitectureSummary s;
    for (std::size_t i = 0; i < connections.size(); ++i) {
        if (connections[i] == 0) throw StructuralError("layer with zero connections");
        s.layers.push_back({i, connections[i]});
    }
    const auto [lo, hi] = std::minmax_element(connections.begin(), connections.end());
    s.c_min = *lo;
    s.c_max = *hi;
    s.c_median = median({connections.begin(), connections.end()});
    s.depth = connections.size();
    return s;
}

ArchitectureSummary summarize(const NetworkSpec& spec) {
    std::vector<std::size_t> counts;
    for (auto [fan_in, fan_out] : spec.layer_dims()) counts.push_back(fan_in * fan_out);
    return summarize(counts);
}

ArchitectureSummary summarize(const Network& net) {
    std::vector<std::size_t> counts;
    for (const auto& layer : net.layers()) counts.push_back(layer.weights.size());
    return summarize(counts);
}

}  // namespace caadam
