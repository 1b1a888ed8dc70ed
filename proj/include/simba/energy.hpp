#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "simba/autodiff.hpp"
#include "simba/g2g.hpp"
#include "simba/parameters.hpp"

namespace simba {

struct RewConfig {
    double lambda = 0.5;
    std::size_t steps = 2;
    double eps_min = 0.5;
    double eps_max = 0.75;
};

void validate(const RewConfig& config);

// Single affine map r -> C ("cls.w", "cls.b").
class Classifier {
public:
    Classifier(std::size_t input_dim, std::size_t classes, ParameterStore& store, Rng& rng);

    Var forward(Tape& tape, const Var& h, bool grad) const;
    Tensor forward(const Tensor& h) const;

    std::size_t classes() const { return classes_; }
    Parameter& weight() { return *w_; }
    Parameter& bias() { return *b_; }

private:
    std::size_t input_dim_;
    std::size_t classes_;
    Parameter* w_;
    Parameter* b_;
};

// Categorical distribution over classes (row softmax of the logits).
Tensor predictive_distribution(const Tensor& logits);

// e_i = -logsumexp(logits row i).
std::vector<double> free_energy(const Tensor& logits);

// E <- lambda E + (1 - lambda) P E, applied `steps` times. lambda in (0, 1];
// lambda = 1 and steps = 0 return e0 unchanged.
std::vector<double> propagate_energy(std::span<const double> e0, const G2GAbstraction& abstraction, double lambda,
                                     std::size_t steps);

// ranks[i] = position of entry i in ascending order; ties by ascending index.
std::vector<std::size_t> rank_energies(std::span<const double> energies);

// delta_i = eps_min + (eps_max - eps_min) / 2 * (1 + cos(pi * rank_i / N)).
std::vector<double> cosine_anneal_weights(std::span<const std::size_t> ranks, std::size_t n, double eps_min,
                                          double eps_max);

// sum_i delta_i * (logsumexp(logits_i) - logits_i[y_i]). delta is a constant.
Var weighted_nll_loss(const Var& logits, std::span<const std::size_t> labels, std::span<const double> delta);

struct EnergyState {
    std::vector<double> e0;
    std::vector<double> et;
    std::vector<std::size_t> ranks;
    std::vector<double> weights;
};

EnergyState compute_energy_state(const Tensor& logits, const G2GAbstraction& abstraction, const RewConfig& config);

// CSV rows "epoch,graph,e0,et,rank,delta"; header written when epoch == 0.
void write_energy_trace(std::ostream& out, std::size_t epoch, std::span<const std::size_t> member_ids,
                        const EnergyState& state);

}  // namespace simba
