#include "simba/optimizer.hpp"

#include <cmath>

#include "simba/errors.hpp"

namespace simba {

Adam::Adam(std::vector<Parameter*> params, AdamConfig config) : params_(std::move(params)), config_(config) {
    if (!(config_.lr > 0.0)) {
        throw ArgumentError("adam: learning rate must be positive");
    }
    if (!(config_.beta1 >= 0.0 && config_.beta1 < 1.0 && config_.beta2 >= 0.0 && config_.beta2 < 1.0)) {
        throw ArgumentError("adam: betas must lie in [0, 1)");
    }
    if (config_.weight_decay < 0.0 || config_.eps <= 0.0) {
        throw ArgumentError("adam: weight decay must be >= 0 and eps > 0");
    }
    for (const Parameter* p : params_) {
        m_.emplace_back(p->value.rows(), p->value.cols());
        v_.emplace_back(p->value.rows(), p->value.cols());
    }
}

void Adam::zero_grad() {
    for (Parameter* p : params_) p->zero_grad();
}

void Adam::step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(config_.beta1, double(t_));
    const double bc2 = 1.0 - std::pow(config_.beta2, double(t_));
    for (std::size_t k = 0; k < params_.size(); ++k) {
        Parameter& p = *params_[k];
        if (p.grad.rows() != p.value.rows() || p.grad.cols() != p.value.cols()) {
            throw DimensionError("adam: gradient " + shape_string(p.grad) + " for parameter '" + p.name + "' " +
                                 shape_string(p.value));
        }
        Tensor& m = m_[k];
        Tensor& v = v_[k];
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            const double g = p.grad[i];
            p.value[i] -= config_.lr * config_.weight_decay * p.value[i];
            m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g;
            v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g * g;
            p.value[i] -= config_.lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + config_.eps);
        }
    }
}

}  // namespace simba
