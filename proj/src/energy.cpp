#include "simba/energy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>

#include "simba/errors.hpp"

namespace simba {

void validate(const RewConfig& c) {
    if (!(c.lambda > 0.0 && c.lambda < 1.0)) throw ArgumentError("lambda must lie in (0, 1)");
    if (!(c.eps_min >= 0.0 && c.eps_min <= c.eps_max)) throw ArgumentError("need 0 <= eps_min <= eps_max");
}

Classifier::Classifier(std::size_t input_dim, std::size_t classes, ParameterStore& store, Rng& rng)
    : input_dim_(input_dim), classes_(classes) {
    if (input_dim == 0 || classes == 0) throw ArgumentError("classifier dimensions must be >= 1");
    w_ = &store.add("cls.w", glorot_uniform(input_dim, classes, rng));
    b_ = &store.add("cls.b", Tensor(1, classes));
}

Var Classifier::forward(Tape& tape, const Var& h, bool grad) const {
    if (h.cols() != input_dim_) {
        throw DimensionError("classifier expects " + std::to_string(input_dim_) + " features, got " +
                             shape_string(h.value()));
    }
    Var w = grad ? tape.parameter(*w_) : tape.constant(w_->value);
    Var b = grad ? tape.parameter(*b_) : tape.constant(b_->value);
    return ops::add_row(ops::matmul(h, w), b);
}

Tensor Classifier::forward(const Tensor& h) const {
    Tape tape;
    return forward(tape, tape.constant(h), false).value();
}

Tensor predictive_distribution(const Tensor& logits) {
    Tape tape;
    return ops::row_softmax(tape.constant(logits)).value();
}

std::vector<double> free_energy(const Tensor& logits) {
    if (logits.cols() == 0) throw DimensionError("free energy: logits have no classes " + shape_string(logits));
    std::vector<double> e(logits.rows());
    for (std::size_t i = 0; i < logits.rows(); ++i) e[i] = -logsumexp(logits.row(i));
    return e;
}

std::vector<double> propagate_energy(std::span<const double> e0, const G2GAbstraction& abstraction, double lambda,
                                     std::size_t steps) {
    if (e0.size() != abstraction.size()) {
        throw DimensionError("energy propagation: " + std::to_string(e0.size()) + " energies for " +
                             std::to_string(abstraction.size()) + " graphs");
    }
    if (!(lambda > 0.0 && lambda <= 1.0)) throw ArgumentError("lambda must lie in (0, 1]");
    std::vector<double> e(e0.begin(), e0.end());
    if (lambda == 1.0) return e;
    const SparseRows& p = abstraction.propagation();
    std::vector<double> next(e.size());
    for (std::size_t s = 0; s < steps; ++s) {
        for (std::size_t i = 0; i < e.size(); ++i) {
            double pe = 0.0;
            for (std::size_t k = p.offsets[i]; k < p.offsets[i + 1]; ++k) pe += p.weight[k] * e[p.index[k]];
            next[i] = lambda * e[i] + (1.0 - lambda) * pe;
        }
        e.swap(next);
    }
    return e;
}

std::vector<std::size_t> rank_energies(std::span<const double> energies) {
    std::vector<std::size_t> order(energies.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return energies[a] < energies[b]; });
    std::vector<std::size_t> ranks(energies.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos) ranks[order[pos]] = pos;
    return ranks;
}

std::vector<double> cosine_anneal_weights(std::span<const std::size_t> ranks, std::size_t n, double eps_min,
                                          double eps_max) {
    if (n == 0) throw ArgumentError("cosine annealing needs N >= 1");
    std::vector<double> w(ranks.size());
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        const double phase = double(ranks[i]) / double(n) * std::numbers::pi;
        w[i] = eps_min + 0.5 * (eps_max - eps_min) * (1.0 + std::cos(phase));
    }
    return w;
}

Var weighted_nll_loss(const Var& logits, std::span<const std::size_t> labels, std::span<const double> delta) {
    const std::size_t n = logits.rows();
    if (labels.size() != n || delta.size() != n) {
        throw DimensionError("weighted NLL: " + std::to_string(labels.size()) + " labels and " +
                             std::to_string(delta.size()) + " weights for logits " + shape_string(logits.value()));
    }
    for (std::size_t y : labels) {
        if (y >= logits.cols()) {
            throw ArgumentError("weighted NLL: label " + std::to_string(y) + " outside [0, " +
                                std::to_string(logits.cols()) + ")");
        }
    }
    Var per_instance = ops::sub(ops::row_logsumexp(logits), ops::pick(logits, labels));
    return ops::reduce_sum(ops::mul_const(per_instance, Tensor::column_vector(delta)));
}

EnergyState compute_energy_state(const Tensor& logits, const G2GAbstraction& abstraction, const RewConfig& config) {
    EnergyState st;
    st.e0 = free_energy(logits);
    st.et = propagate_energy(st.e0, abstraction, config.lambda, config.steps);
    st.ranks = rank_energies(st.et);
    st.weights = cosine_anneal_weights(st.ranks, st.ranks.size(), config.eps_min, config.eps_max);
    return st;
}

void write_energy_trace(std::ostream& out, std::size_t epoch, std::span<const std::size_t> member_ids,
                        const EnergyState& state) {
    if (epoch == 0) out << "epoch,graph,e0,et,rank,delta\n";
    const auto old = out.precision(17);
    for (std::size_t i = 0; i < state.e0.size(); ++i) {
        out << epoch << ',' << (i < member_ids.size() ? member_ids[i] : i) << ',' << state.e0[i] << ','
            << state.et[i] << ',' << state.ranks[i] << ',' << state.weights[i] << '\n';
    }
    out.precision(old);
}

}  // namespace simba
