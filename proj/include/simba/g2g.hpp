#pragma once

#include <filesystem>
#include <vector>

#include "simba/autodiff.hpp"

namespace simba {

// kNN graph whose nodes are whole graphs. Row i lists its neighbours
// (ascending, self included); the propagation operator is the row
// normalization P = D~^-1 B~, i.e. P(i, j) = 1 / degree(i) for each neighbour.
class G2GAbstraction {
public:
    G2GAbstraction() = default;
    G2GAbstraction(std::vector<std::size_t> member_ids, std::vector<std::vector<std::size_t>> neighbors,
                   std::vector<std::vector<double>> similarity);

    std::size_t size() const { return neighbors_.size(); }
    const std::vector<std::size_t>& member_ids() const { return member_ids_; }
    const std::vector<std::size_t>& neighbors(std::size_t i) const { return neighbors_[i]; }
    const std::vector<double>& similarity(std::size_t i) const { return similarity_[i]; }
    std::size_t degree(std::size_t i) const { return neighbors_[i].size(); }
    std::vector<std::size_t> degrees() const;

    Tensor adjacency() const;      // dense 0/1 with unit diagonal
    Tensor norm_operator() const;  // dense P
    const SparseRows& propagation() const { return op_; }

    // Writes "i j similarity" for every undirected edge i < j (member ids).
    void dump(const std::filesystem::path& path) const;

private:
    std::vector<std::size_t> member_ids_;
    std::vector<std::vector<std::size_t>> neighbors_;
    std::vector<std::vector<double>> similarity_;
    SparseRows op_;
};

// S(i, j) = <h_i, h_j> / (|h_i| |h_j|). A zero-norm row gets similarity 0 to
// every other row and 1 to itself, and triggers a warning.
Tensor cosine_similarity_matrix(const Tensor& embeddings);

// Links every row to its k most similar other rows (ties to the lower index),
// symmetrizes by union and adds self-loops. Requires 1 <= k < N. member_ids
// defaults to 0..N-1.
G2GAbstraction build_knn_abstraction(const Tensor& similarity, std::size_t k,
                                     std::vector<std::size_t> member_ids = {});

// Inference topology: keeps the training rows as they are and appends one row
// per evaluated graph, linked to itself and its k most similar training
// graphs. Appended rows are not linked back, so evaluated graphs never
// influence training graphs or each other. Rows of the result: training
// members first, then evaluated graphs in the given order.
G2GAbstraction extend_inductive(const G2GAbstraction& training, const Tensor& train_embeddings,
                                const Tensor& eval_embeddings, std::size_t k,
                                const std::vector<std::size_t>& eval_ids);

// Applies P `hops` times. hops = 0 returns the input unchanged. The tape
// version keeps a reference to the abstraction's operator.
Var g2g_propagate(const G2GAbstraction& abstraction, const Var& h, std::size_t hops);
Tensor g2g_propagate(const G2GAbstraction& abstraction, const Tensor& h, std::size_t hops);

}  // namespace simba
