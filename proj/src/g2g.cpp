#include "simba/g2g.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "simba/errors.hpp"
#include "simba/log.hpp"

namespace simba {

G2GAbstraction::G2GAbstraction(std::vector<std::size_t> member_ids, std::vector<std::vector<std::size_t>> neighbors,
                               std::vector<std::vector<double>> similarity)
    : member_ids_(std::move(member_ids)), neighbors_(std::move(neighbors)), similarity_(std::move(similarity)) {
    const std::size_t n = neighbors_.size();
    if (member_ids_.size() != n || similarity_.size() != n) {
        throw DimensionError("abstraction: inconsistent member/neighbour/similarity counts");
    }
    op_.rows = n;
    op_.cols = n;
    for (std::size_t i = 0; i < n; ++i) {
        if (neighbors_[i].empty()) throw ArgumentError("abstraction row without self-loop");
        const double w = 1.0 / double(neighbors_[i].size());
        for (std::size_t j : neighbors_[i]) {
            if (j >= n) throw ArgumentError("abstraction neighbour out of range");
            op_.index.push_back(j);
            op_.weight.push_back(w);
        }
        op_.offsets.push_back(op_.index.size());
    }
}

std::vector<std::size_t> G2GAbstraction::degrees() const {
    std::vector<std::size_t> d;
    d.reserve(size());
    for (const auto& row : neighbors_) d.push_back(row.size());
    return d;
}

Tensor G2GAbstraction::adjacency() const {
    Tensor a(size(), size());
    for (std::size_t i = 0; i < size(); ++i) {
        for (std::size_t j : neighbors_[i]) a(i, j) = 1.0;
    }
    return a;
}

Tensor G2GAbstraction::norm_operator() const {
    Tensor p(size(), size());
    for (std::size_t i = 0; i < size(); ++i) {
        for (std::size_t j : neighbors_[i]) p(i, j) = 1.0 / double(neighbors_[i].size());
    }
    return p;
}

void G2GAbstraction::dump(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path.string());
    out.precision(17);
    for (std::size_t i = 0; i < size(); ++i) {
        for (std::size_t k = 0; k < neighbors_[i].size(); ++k) {
            const std::size_t j = neighbors_[i][k];
            if (i < j) out << member_ids_[i] << ' ' << member_ids_[j] << ' ' << similarity_[i][k] << '\n';
        }
    }
}

namespace {

std::vector<double> row_norms(const Tensor& e) {
    std::vector<double> norms(e.rows());
    for (std::size_t i = 0; i < e.rows(); ++i) {
        double s = 0.0;
        for (double v : e.row(i)) s += v * v;
        norms[i] = std::sqrt(s);
    }
    return norms;
}

// Indices of the k largest entries of `scores`, skipping `exclude`; ties go to
// the lower index.
std::vector<std::size_t> top_k(std::span<const double> scores, std::size_t k, std::size_t exclude) {
    std::vector<std::size_t> idx;
    idx.reserve(scores.size());
    for (std::size_t j = 0; j < scores.size(); ++j) {
        if (j != exclude) idx.push_back(j);
    }
    auto better = [&](std::size_t a, std::size_t b) { return scores[a] > scores[b] || (scores[a] == scores[b] && a < b); };
    k = std::min(k, idx.size());
    std::partial_sort(idx.begin(), idx.begin() + std::ptrdiff_t(k), idx.end(), better);
    idx.resize(k);
    return idx;
}

}  // namespace

Tensor cosine_similarity_matrix(const Tensor& e) {
    const std::size_t n = e.rows();
    const auto norms = row_norms(e);
    Tensor dots = matmul_transposed_b(e, e);
    Tensor s(n, n);
    std::size_t degenerate = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (norms[i] == 0.0) ++degenerate;
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) {
                s(i, j) = 1.0;
            } else if (norms[i] == 0.0 || norms[j] == 0.0) {
                s(i, j) = 0.0;
            } else {
                s(i, j) = dots(i, j) / (norms[i] * norms[j]);
            }
        }
    }
    if (degenerate > 0) {
        warn("cosine similarity: " + std::to_string(degenerate) + " zero-norm embedding(s)");
    }
    return s;
}

G2GAbstraction build_knn_abstraction(const Tensor& s, std::size_t k, std::vector<std::size_t> member_ids) {
    const std::size_t n = s.rows();
    if (s.cols() != n) throw DimensionError("kNN: similarity matrix must be square, got " + shape_string(s));
    if (k < 1 || k >= n) {
        throw ArgumentError("kNN: k must satisfy 1 <= k < N (k = " + std::to_string(k) + ", N = " +
                            std::to_string(n) + ")");
    }
    if (member_ids.empty()) {
        member_ids.resize(n);
        std::iota(member_ids.begin(), member_ids.end(), 0);
    }
    std::vector<std::vector<std::size_t>> nbrs(n);
    for (std::size_t i = 0; i < n; ++i) {
        nbrs[i].push_back(i);
        for (std::size_t j : top_k(s.row(i), k, i)) {
            nbrs[i].push_back(j);
            nbrs[j].push_back(i);
        }
    }
    std::vector<std::vector<double>> sims(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::sort(nbrs[i].begin(), nbrs[i].end());
        nbrs[i].erase(std::unique(nbrs[i].begin(), nbrs[i].end()), nbrs[i].end());
        for (std::size_t j : nbrs[i]) sims[i].push_back(s(i, j));
    }
    return G2GAbstraction(std::move(member_ids), std::move(nbrs), std::move(sims));
}

G2GAbstraction extend_inductive(const G2GAbstraction& training, const Tensor& train_embeddings,
                                const Tensor& eval_embeddings, std::size_t k,
                                const std::vector<std::size_t>& eval_ids) {
    const std::size_t nt = training.size();
    const std::size_t ne = eval_embeddings.rows();
    if (train_embeddings.rows() != nt) {
        throw DimensionError("inductive abstraction: " + std::to_string(nt) + " training members vs embeddings " +
                             shape_string(train_embeddings));
    }
    if (eval_ids.size() != ne) throw DimensionError("inductive abstraction: eval id count mismatch");
    if (k < 1 || k > nt) throw ArgumentError("inductive abstraction: k must satisfy 1 <= k <= training size");
    if (eval_embeddings.cols() != train_embeddings.cols()) {
        throw DimensionError("inductive abstraction: " + shape_string(eval_embeddings) + " vs " +
                             shape_string(train_embeddings));
    }

    const auto tn = row_norms(train_embeddings);
    const auto en = row_norms(eval_embeddings);
    const Tensor dots = matmul_transposed_b(eval_embeddings, train_embeddings);

    std::vector<std::size_t> members = training.member_ids();
    members.insert(members.end(), eval_ids.begin(), eval_ids.end());
    std::vector<std::vector<std::size_t>> nbrs(nt + ne);
    std::vector<std::vector<double>> sims(nt + ne);
    for (std::size_t i = 0; i < nt; ++i) {
        nbrs[i] = training.neighbors(i);
        sims[i] = training.similarity(i);
    }
    std::vector<double> row(nt);
    for (std::size_t e = 0; e < ne; ++e) {
        for (std::size_t j = 0; j < nt; ++j) {
            row[j] = (en[e] == 0.0 || tn[j] == 0.0) ? 0.0 : dots(e, j) / (en[e] * tn[j]);
        }
        auto best = top_k(row, k, nt);
        std::sort(best.begin(), best.end());
        auto& out = nbrs[nt + e];
        for (std::size_t j : best) {
            out.push_back(j);
            sims[nt + e].push_back(row[j]);
        }
        out.push_back(nt + e);
        sims[nt + e].push_back(1.0);
    }
    return G2GAbstraction(std::move(members), std::move(nbrs), std::move(sims));
}

Var g2g_propagate(const G2GAbstraction& abstraction, const Var& h, std::size_t hops) {
    if (h.rows() != abstraction.size()) {
        throw DimensionError("g2g propagate: " + std::to_string(abstraction.size()) + " members, features " +
                             shape_string(h.value()));
    }
    Var out = h;
    for (std::size_t i = 0; i < hops; ++i) out = ops::sparse_apply(abstraction.propagation(), out);
    return out;
}

Tensor g2g_propagate(const G2GAbstraction& abstraction, const Tensor& h, std::size_t hops) {
    if (h.rows() != abstraction.size()) {
        throw DimensionError("g2g propagate: " + std::to_string(abstraction.size()) + " members, features " +
                             shape_string(h));
    }
    Tensor out = h;
    for (std::size_t i = 0; i < hops; ++i) out = abstraction.propagation().apply(out);
    return out;
}

}  // namespace simba
