#include "caadam/scaling.hpp"

#include <cmath>
#include <string>

#include "caadam/error.hpp"

namespace caadam {

namespace {

void require_unit_gamma(double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) {
        throw ConfigError("MinMaxMedian scaling requires gamma in (0, 1), got " + std::to_string(gamma));
    }
}

// Distance of c from the median, normalized by the span to c_min (below) or
// c_max (above). Below-median distances are returned negated.
double signed_distance(const ArchitectureSummary& s, double c) {
    const double med = s.c_median;
    if (c <= med) {
        const double span = med - static_cast<double>(s.c_min);
        return span == 0.0 ? 0.0 : -(med - c) / span;
    }
    const double span = static_cast<double>(s.c_max) - med;
    return span == 0.0 ? 0.0 : (c - med) / span;
}

}  // namespace

void ScalingStrategy::validate() const {
    if (kind == ScalingKind::depth) {
        if (!(gamma > -1.0) || !std::isfinite(gamma)) {
            throw ConfigError("depth scaling requires gamma > -1");
        }
    } else {
        require_unit_gamma(gamma);
    }
}

std::string_view to_string(ScalingKind kind) {
    switch (kind) {
        case ScalingKind::additive: return "additive";
        case ScalingKind::multiplicative: return "multiplicative";
        case ScalingKind::depth: return "depth";
    }
    return "unknown";
}

std::optional<ScalingKind> parse_scaling_kind(std::string_view name) {
    if (name == "additive") return ScalingKind::additive;
    if (name == "multiplicative") return ScalingKind::multiplicative;
    if (name == "depth") return ScalingKind::depth;
    return std::nullopt;
}

ScaleTable scale_additive(const ArchitectureSummary& summary, double gamma) {
    require_unit_gamma(gamma);
    ScaleTable table;
    table.reserve(summary.layers.size());
    for (const auto& layer : summary.layers) {
        const double sigma = signed_distance(summary, static_cast<double>(layer.connections));
        // sigma <= 0 below the median, so both branches reduce to 1 - gamma*sigma.
        table.push_back(1.0 - gamma * sigma);
    }
    return table;
}

ScaleTable scale_multiplicative(const ArchitectureSummary& summary, double gamma, SigmaMode mode) {
    require_unit_gamma(gamma);
    const double log_gamma = std::log(gamma);
    ScaleTable table;
    table.reserve(summary.layers.size());
    for (const auto& layer : summary.layers) {
        double sigma = signed_distance(summary, static_cast<double>(layer.connections));
        if (mode == SigmaMode::unsigned_distance) sigma = std::abs(sigma);
        table.push_back(std::exp(sigma * log_gamma));
    }
    return table;
}

ScaleTable scale_depth(const ArchitectureSummary& summary, double gamma) {
    if (!(gamma > -1.0)) throw ConfigError("depth scaling requires gamma > -1");
    if (summary.depth == 0) throw StructuralError("depth scaling on an empty network");
    const double total = static_cast<double>(summary.depth);
    ScaleTable table;
    table.reserve(summary.layers.size());
    for (const auto& layer : summary.layers) {
        const double exponent = (total - (1.0 + static_cast<double>(layer.index))) / total;
        table.push_back(std::pow(1.0 + gamma, exponent));
    }
    return table;
}

ScaleTable compute_scales(const ArchitectureSummary& summary, const ScalingStrategy& strategy) {
    strategy.validate();
    switch (strategy.kind) {
        case ScalingKind::additive: return scale_additive(summary, strategy.gamma);
        case ScalingKind::multiplicative:
            return scale_multiplicative(summary, strategy.gamma, strategy.sigma_mode);
        case ScalingKind::depth: return scale_depth(summary, strategy.gamma);
    }
    throw ConfigError("unknown scaling strategy");
}

}  // namespace caadam
