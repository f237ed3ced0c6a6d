#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "caadam/nn.hpp"
#include "caadam/scaling.hpp"
#include "json.hpp"

namespace caadam {

enum class Algorithm { sgd, adagrad, adadelta, rmsprop, adam, adamw, adamax, nadam, caadam };

std::string_view to_string(Algorithm algorithm);
std::optional<Algorithm> parse_algorithm(std::string_view name);

struct OptimizerConfig {
    Algorithm algorithm = Algorithm::adam;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    /// Decay of the squared-gradient average used by Adadelta. RMSprop always
    /// uses 0.9.
    double decay = 0.9;
    /// Decoupled weight decay, AdamW only.
    double weight_decay = 0.004;
    /// Required for CaAdam, ignored otherwise.
    std::optional<ScalingStrategy> scaling;

    void validate() const;
    /// Short label such as "adam" or "caadam-multiplicative".
    std::string label() const;
};

nlohmann::json to_json(const OptimizerConfig& config);
/// Accepts {"algorithm": ..., "learning_rate"?, "beta1"?, "beta2"?, "epsilon"?,
/// "decay"?, "weight_decay"?, "scaling"?, "gamma"?, "multiplicative_sigma"?}.
/// Throws ConfigError on unknown names or invalid values.
OptimizerConfig optimizer_config_from_json(const nlohmann::json& j);

/// Stateful first-order optimizer over the parameters of one Network.
///
/// Parameter tensors are visited as (layer 0 weights, layer 0 bias, layer 1
/// weights, ...). Each tensor owns two accumulators whose meaning depends on
/// the algorithm:
///
///   algorithm  first          second
///   sgd        -              -
///   adagrad    -              running sum of g^2
///   adadelta   -              decayed mean of g^2
///   rmsprop    -              decayed mean of g^2 (0.9 / 0.1)
///   adam(w)    m              v
///   adamax     m              u = max(beta2 * u, |g|)
///   nadam      m              v
///   caadam     m              v
///
/// The learning rate is supplied on every step so that an external schedule
/// can change it without touching optimizer state.
class Optimizer {
public:
    /// Builds zeroed state for `net`. CaAdam derives its per-layer scale table
    /// from summarize(net) and config.scaling; other algorithms use S = 1.
    Optimizer(OptimizerConfig config, const Network& net);

    /// CaAdam with a caller-provided scale table (one entry per layer).
    static Optimizer with_scale_table(OptimizerConfig config, const Network& net, ScaleTable scales);

    /// Advances the state by one step and returns the additive parameter
    /// update without applying it. Throws NonFiniteError if any entry of the
    /// update is not finite.
    GradientSet compute_update(const Network& net, const GradientSet& grads, double lr);

    /// compute_update followed by apply_update.
    void step(Network& net, const GradientSet& grads, double lr);

    const OptimizerConfig& config() const noexcept { return config_; }
    std::uint64_t steps() const noexcept { return step_; }
    const ScaleTable& scales() const noexcept { return scales_; }
    const std::vector<Matrix>& first_moments() const noexcept { return first_; }
    const std::vector<Matrix>& second_moments() const noexcept { return second_; }

    nlohmann::json to_json() const;
    static Optimizer from_json(const nlohmann::json& j);
    void save(const std::filesystem::path& path) const;
    static Optimizer load(const std::filesystem::path& path);

    static constexpr int kCheckpointVersion = 1;

private:
    Optimizer() = default;
    void allocate(const Network& net);
    void check_congruent(const Network& net, const GradientSet& grads) const;

    OptimizerConfig config_;
    std::uint64_t step_ = 0;
    ScaleTable scales_;
    std::vector<Matrix> first_;
    std::vector<Matrix> second_;
};

}  // namespace caadam
