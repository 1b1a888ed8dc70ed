#pragma once

#include <cstdint>
#include <vector>

#include "simba/autodiff.hpp"

namespace simba {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 5e-4;
};

// Adaptive-moment optimizer with bias correction and decoupled weight decay.
// Per step, for each trainable parameter:
//   p -= lr * weight_decay * p
//   m = b1 m + (1 - b1) g ;  v = b2 v + (1 - b2) g^2
//   p -= lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)
class Adam {
public:
    Adam(std::vector<Parameter*> params, AdamConfig config);

    void step();
    void zero_grad();

    std::uint64_t steps() const { return t_; }
    const AdamConfig& config() const { return config_; }

private:
    std::vector<Parameter*> params_;
    AdamConfig config_;
    std::vector<Tensor> m_;
    std::vector<Tensor> v_;
    std::uint64_t t_ = 0;
};

}  // namespace simba
