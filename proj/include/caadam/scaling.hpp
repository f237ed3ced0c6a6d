#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "caadam/arch.hpp"

namespace caadam {

enum class ScalingKind { additive, multiplicative, depth };

/// How the normalized connection distance enters the multiplicative rule.
/// `signed_distance` makes below-median layers negative so that S = gamma^sigma
/// grows above one for them, mirroring the additive rule. `unsigned_distance`
/// keeps sigma >= 0 on both sides of the median, which shrinks every
/// off-median layer.
enum class SigmaMode { signed_distance, unsigned_distance };

struct ScalingStrategy {
    ScalingKind kind = ScalingKind::multiplicative;
    double gamma = 0.95;
    SigmaMode sigma_mode = SigmaMode::signed_distance;

    void validate() const;
};

std::string_view to_string(ScalingKind kind);
std::optional<ScalingKind> parse_scaling_kind(std::string_view name);

/// One positive factor per trainable layer, in forward order.
using ScaleTable = std::vector<double>;

/// S = 1 + gamma*(med - c)/(med - c_min) at or below the median,
/// S = 1 - gamma*(c - med)/(c_max - med) above it. A zero denominator yields 1.
ScaleTable scale_additive(const ArchitectureSummary& summary, double gamma);

/// S = exp(sigma * ln gamma) with sigma the normalized distance from the
/// median (see SigmaMode). A zero denominator yields sigma = 0.
ScaleTable scale_multiplicative(const ArchitectureSummary& summary, double gamma,
                                SigmaMode mode = SigmaMode::signed_distance);

/// S = (1 + gamma)^((depth - (1 + d)) / depth) for zero-based layer index d.
ScaleTable scale_depth(const ArchitectureSummary& summary, double gamma);

ScaleTable compute_scales(const ArchitectureSummary& summary, const ScalingStrategy& strategy);

}  // namespace caadam
