#include "caadam/optim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "caadam/arch.hpp"
#include "caadam/error.hpp"

namespace caadam {

namespace {

constexpr std::pair<Algorithm, std::string_view> kAlgorithmNames[] = {
    {Algorithm::sgd, "sgd"},         {Algorithm::adagrad, "adagrad"}, {Algorithm::adadelta, "adadelta"},
    {Algorithm::rmsprop, "rmsprop"}, {Algorithm::adam, "adam"},       {Algorithm::adamw, "adamw"},
    {Algorithm::adamax, "adamax"},   {Algorithm::nadam, "nadam"},     {Algorithm::caadam, "caadam"},
};

constexpr double kRmspropDecay = 0.9;

std::string_view to_string(SigmaMode mode) {
    return mode == SigmaMode::signed_distance ? "signed" : "unsigned";
}

}  // namespace

std::string_view to_string(Algorithm algorithm) {
    for (auto [a, name] : kAlgorithmNames) {
        if (a == algorithm) return name;
    }
    return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
    for (auto [a, n] : kAlgorithmNames) {
        if (n == name) return a;
    }
    return std::nullopt;
}

void OptimizerConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("beta1 must be in [0, 1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("beta2 must be in [0, 1)");
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
    if (!(decay >= 0.0 && decay < 1.0)) throw ConfigError("decay must be in [0, 1)");
    if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
    if (algorithm == Algorithm::caadam) {
        if (!scaling) throw ConfigError("caadam requires a scaling strategy");
        scaling->validate();
    }
}

std::string OptimizerConfig::label() const {
    std::string out(to_string(algorithm));
    if (algorithm == Algorithm::caadam && scaling) {
        out += '-';
        out += to_string(scaling->kind);
        if (scaling->kind == ScalingKind::multiplicative && scaling->sigma_mode == SigmaMode::unsigned_distance) {
            out += "-unsigned";
        }
    }
    return out;
}

nlohmann::json to_json(const OptimizerConfig& c) {
    nlohmann::json j = {
        {"algorithm", to_string(c.algorithm)},
        {"learning_rate", c.learning_rate},
        {"beta1", c.beta1},
        {"beta2", c.beta2},
        {"epsilon", c.epsilon},
        {"decay", c.decay},
        {"weight_decay", c.weight_decay},
    };
    if (c.scaling) {
        j["scaling"] = to_string(c.scaling->kind);
        j["gamma"] = c.scaling->gamma;
        j["multiplicative_sigma"] = to_string(c.scaling->sigma_mode);
    }
    return j;
}

OptimizerConfig optimizer_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("optimizer entry must be an object");
    OptimizerConfig c;
    try {
        const auto name = j.at("algorithm").get<std::string>();
        const auto algorithm = parse_algorithm(name);
        if (!algorithm) throw ConfigError("unknown optimizer algorithm '" + name + "'");
        c.algorithm = *algorithm;
        c.learning_rate = j.value("learning_rate", c.learning_rate);
        c.beta1 = j.value("beta1", c.beta1);
        c.beta2 = j.value("beta2", c.beta2);
        c.epsilon = j.value("epsilon", c.epsilon);
        c.decay = j.value("decay", c.decay);
        c.weight_decay = j.value("weight_decay", c.weight_decay);
        if (j.contains("scaling")) {
            ScalingStrategy s;
            const auto kind_name = j.at("scaling").get<std::string>();
            const auto kind = parse_scaling_kind(kind_name);
            if (!kind) throw ConfigError("unknown scaling strategy '" + kind_name + "'");
            s.kind = *kind;
            s.gamma = j.value("gamma", s.gamma);
            const auto sigma = j.value("multiplicative_sigma", std::string("signed"));
            if (sigma == "signed") {
                s.sigma_mode = SigmaMode::signed_distance;
            } else if (sigma == "unsigned") {
                s.sigma_mode = SigmaMode::unsigned_distance;
            } else {
                throw ConfigError("multiplicative_sigma must be 'signed' or 'unsigned'");
            }
            c.scaling = s;
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("optimizer config: ") + e.what());
    }
    c.validate();
    return c;
}

Optimizer::Optimizer(OptimizerConfig config, const Network& net) : config_(std::move(config)) {
    config_.validate();
    allocate(net);
    if (config_.algorithm == Algorithm::caadam) {
        scales_ = compute_scales(summarize(net), *config_.scaling);
    }
}

Optimizer Optimizer::with_scale_table(OptimizerConfig config, const Network& net, ScaleTable scales) {
    if (config.algorithm != Algorithm::caadam) throw ConfigError("scale tables apply to caadam only");
    if (!config.scaling) config.scaling = ScalingStrategy{};
    config.validate();
    if (scales.size() != net.num_layers()) throw ShapeError("scale table length does not match layer count");
    for (double s : scales) {
        if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("scale factors must be positive and finite");
    }
    Optimizer opt;
    opt.config_ = std::move(config);
    opt.allocate(net);
    opt.scales_ = std::move(scales);
    return opt;
}

void Optimizer::allocate(const Network& net) {
    first_.clear();
    second_.clear();
    for (const auto& layer : net.layers()) {
        for (const Matrix* p : {&layer.weights, &layer.bias}) {
            first_.push_back(Matrix::zeros_like(*p));
            second_.push_back(Matrix::zeros_like(*p));
        }
    }
    scales_.assign(net.num_layers(), 1.0);
    step_ = 0;
}

void Optimizer::check_congruent(const Network& net, const GradientSet& grads) const {
    if (grads.layers.size() != net.num_layers() || first_.size() != 2 * net.num_layers()) {
        throw ShapeError("optimizer: gradient/parameter layer counts differ");
    }
    for (std::size_t i = 0; i < net.num_layers(); ++i) {
        const auto& p = net.layers()[i];
        const auto& g = grads.layers[i];
        if (!p.weights.same_shape(g.weights) || !p.bias.same_shape(g.bias) ||
            !first_[2 * i].same_shape(p.weights) || !first_[2 * i + 1].same_shape(p.bias)) {
            throw ShapeError("optimizer: shape mismatch in layer " + std::to_string(i));
        }
    }
}

GradientSet Optimizer::compute_update(const Network& net, const GradientSet& grads, double lr) {
    if (!(lr > 0.0)) throw ConfigError("learning rate must be > 0");
    check_congruent(net, grads);
    ++step_;
    const double t = static_cast<double>(step_);
    const double b1 = config_.beta1;
    const double b2 = config_.beta2;
    const double eps = config_.epsilon;
    const double bias_correction1 = 1.0 - std::pow(b1, t);
    const double bias_correction2 = 1.0 - std::pow(b2, t);

    GradientSet update = GradientSet::zeros_like(net.layers());
    for (std::size_t slot = 0; slot < first_.size(); ++slot) {
        const std::size_t layer = slot / 2;
        const bool is_bias = slot % 2 == 1;
        const Matrix& g = is_bias ? grads.layers[layer].bias : grads.layers[layer].weights;
        const Matrix& theta = is_bias ? net.layers()[layer].bias : net.layers()[layer].weights;
        Matrix& out = is_bias ? update.layers[layer].bias : update.layers[layer].weights;
        Matrix& m = first_[slot];
        Matrix& v = second_[slot];
        const double scale = scales_[layer];

        for (std::size_t k = 0; k < g.size(); ++k) {
            const double gk = g[k];
            switch (config_.algorithm) {
                case Algorithm::sgd:
                    out[k] = -lr * gk;
                    break;
                case Algorithm::adagrad:
                    v[k] += gk * gk;
                    out[k] = -lr / std::sqrt(v[k] + eps) * gk;
                    break;
                case Algorithm::adadelta:
                    // Learning-rate form: eta over the RMS of recent gradients.
                    v[k] = config_.decay * v[k] + (1.0 - config_.decay) * gk * gk;
                    out[k] = -lr / std::sqrt(v[k] + eps) * gk;
                    break;
                case Algorithm::rmsprop:
                    v[k] = kRmspropDecay * v[k] + (1.0 - kRmspropDecay) * gk * gk;
                    out[k] = -lr / std::sqrt(v[k] + eps) * gk;
                    break;
                case Algorithm::adam:
                case Algorithm::adamw:
                case Algorithm::caadam: {
                    m[k] = b1 * m[k] + (1.0 - b1) * gk;
                    v[k] = b2 * v[k] + (1.0 - b2) * gk * gk;
                    const double m_hat = m[k] / bias_correction1;
                    const double v_hat = v[k] / bias_correction2;
                    const double adam_step = -lr * m_hat / (std::sqrt(v_hat) + eps);
                    if (config_.algorithm == Algorithm::caadam) {
                        out[k] = scale * adam_step;
                    } else if (config_.algorithm == Algorithm::adamw) {
                        out[k] = adam_step - lr * config_.weight_decay * theta[k];
                    } else {
                        out[k] = adam_step;
                    }
                    break;
                }
                case Algorithm::adamax: {
                    m[k] = b1 * m[k] + (1.0 - b1) * gk;
                    v[k] = std::max(b2 * v[k], std::abs(gk));
                    const double m_hat = m[k] / bias_correction1;
                    out[k] = -lr * m_hat / (v[k] + eps);
                    break;
                }
                case Algorithm::nadam: {
                    m[k] = b1 * m[k] + (1.0 - b1) * gk;
                    v[k] = b2 * v[k] + (1.0 - b2) * gk * gk;
                    const double m_hat = m[k] / bias_correction1;
                    const double v_hat = v[k] / bias_correction2;
                    const double lookahead = b1 * m_hat + (1.0 - b1) * gk / bias_correction1;
                    out[k] = -lr / (std::sqrt(v_hat) + eps) * lookahead;
                    break;
                }
            }
            if (!std::isfinite(out[k])) {
                throw NonFiniteError("optimizer produced a non-finite update at step " + std::to_string(step_) +
                                     " (layer " + std::to_string(layer) + (is_bias ? " bias" : " weights") +
                                     ", index " + std::to_string(k) + ")");
            }
        }
    }
    return update;
}

void Optimizer::step(Network& net, const GradientSet& grads, double lr) {
    apply_update(net, compute_update(net, grads, lr));
}

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::vector<double>(m.values().begin(), m.values().end())}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
    return Matrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
                  j.at("data").get<std::vector<double>>());
}

}  // namespace

nlohmann::json Optimizer::to_json() const {
    nlohmann::json tensors = nlohmann::json::array();
    for (std::size_t slot = 0; slot < first_.size(); ++slot) {
        tensors.push_back({
            {"name", "layer" + std::to_string(slot / 2) + (slot % 2 ? ".bias" : ".weights")},
            {"first", matrix_to_json(first_[slot])},
            {"second", matrix_to_json(second_[slot])},
        });
    }
    return {
        {"format", "caadam-optimizer-state"},
        {"version", kCheckpointVersion},
        {"algorithm", caadam::to_string(config_.algorithm)},
        {"config", caadam::to_json(config_)},
        {"step", step_},
        {"scales", scales_},
        {"tensors", std::move(tensors)},
    };
}

Optimizer Optimizer::from_json(const nlohmann::json& j) {
    try {
        if (j.at("format").get<std::string>() != "caadam-optimizer-state") {
            throw IoError("not an optimizer checkpoint");
        }
        if (j.at("version").get<int>() != kCheckpointVersion) {
            throw IoError("unsupported optimizer checkpoint version " + j.at("version").dump());
        }
        Optimizer opt;
        opt.config_ = optimizer_config_from_json(j.at("config"));
        if (caadam::to_string(opt.config_.algorithm) != j.at("algorithm").get<std::string>()) {
            throw IoError("checkpoint algorithm tag disagrees with its config");
        }
        opt.step_ = j.at("step").get<std::uint64_t>();
        opt.scales_ = j.at("scales").get<std::vector<double>>();
        for (const auto& t : j.at("tensors")) {
            opt.first_.push_back(matrix_from_json(t.at("first")));
            opt.second_.push_back(matrix_from_json(t.at("second")));
            if (!opt.first_.back().same_shape(opt.second_.back())) {
                throw IoError("checkpoint accumulators disagree in shape");
            }
        }
        if (opt.first_.size() != 2 * opt.scales_.size()) {
            throw IoError("checkpoint tensor count does not match its scale table");
        }
        return opt;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("malformed optimizer checkpoint: ") + e.what());
    }
}

void Optimizer::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << to_json().dump(1) << '\n';
}

Optimizer Optimizer::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("cannot parse " + path.string() + ": " + e.what());
    }
    return from_json(j);
}

}  // namespace caadam
