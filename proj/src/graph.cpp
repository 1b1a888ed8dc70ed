#include "simba/graph.hpp"

#include <algorithm>

#include "simba/errors.hpp"

namespace simba {

std::vector<std::size_t> Graph::degrees() const {
    std::vector<std::size_t> deg(node_count, 0);
    for (const auto& [u, v] : edges) {
        ++deg[u];
        ++deg[v];
    }
    return deg;
}

void normalize_edges(Graph& g) {
    std::vector<Edge> out;
    out.reserve(g.edges.size());
    for (auto [u, v] : g.edges) {
        if (u >= g.node_count || v >= g.node_count) {
            throw ConsistencyError("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                                   ") outside graph with " + std::to_string(g.node_count) + " nodes");
        }
        if (u == v) continue;
        if (u > v) std::swap(u, v);
        out.emplace_back(u, v);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    g.edges = std::move(out);
}

std::vector<std::size_t> GraphSet::sizes() const {
    std::vector<std::size_t> out;
    out.reserve(graphs.size());
    for (const auto& g : graphs) out.push_back(g.node_count);
    return out;
}

std::vector<std::size_t> GraphSet::labels() const {
    std::vector<std::size_t> out;
    out.reserve(graphs.size());
    for (const auto& g : graphs) out.push_back(g.label);
    return out;
}

namespace {

void check_cover(const std::vector<std::vector<std::size_t>>& parts, std::size_t n, const std::string& what) {
    std::vector<int> seen(n, 0);
    for (const auto& part : parts) {
        for (std::size_t i : part) {
            if (i >= n) throw ConsistencyError(what + ": index " + std::to_string(i) + " out of range");
            if (seen[i]++) throw ConsistencyError(what + ": index " + std::to_string(i) + " appears twice");
        }
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
        throw ConsistencyError(what + ": does not cover every graph");
    }
}

}  // namespace

void validate(const GraphSet& set) {
    for (std::size_t i = 0; i < set.graphs.size(); ++i) {
        const Graph& g = set.graphs[i];
        const std::string where = "graph " + std::to_string(i);
        if (g.node_count == 0) throw ConsistencyError(where + " has no nodes");
        if (g.features.rows() != g.node_count || g.features.cols() != set.feature_dim) {
            throw ConsistencyError(where + ": features " + shape_string(g.features) + " expected [" +
                                   std::to_string(g.node_count) + "x" + std::to_string(set.feature_dim) + "]");
        }
        if (g.label >= set.num_classes) throw ConsistencyError(where + ": label out of range");
        for (std::size_t k = 0; k < g.edges.size(); ++k) {
            const auto [u, v] = g.edges[k];
            if (!(u < v) || v >= g.node_count) throw ConsistencyError(where + ": edge not canonical or out of range");
            if (k > 0 && !(g.edges[k - 1] < g.edges[k])) throw ConsistencyError(where + ": edges not sorted/unique");
        }
    }
    if (!set.head_ids.empty() || !set.tail_ids.empty()) {
        check_cover({set.head_ids, set.tail_ids}, set.size(), "head/tail partition");
    }
    const auto& s = set.splits;
    if (!s.train.empty() || !s.val.empty() || !s.test.empty()) {
        check_cover({s.train, s.val, s.test}, set.size(), "splits");
    }
}

DatasetStats describe(const GraphSet& set) {
    DatasetStats st;
    st.graphs = set.size();
    st.classes = set.num_classes;
    st.feature_dim = set.feature_dim;
    st.class_counts.assign(set.num_classes, 0);
    if (set.graphs.empty()) return st;
    st.min_nodes = set.graphs.front().node_count;
    double nodes = 0.0, edges = 0.0;
    for (const auto& g : set.graphs) {
        nodes += double(g.node_count);
        edges += double(g.edge_count());
        st.min_nodes = std::min(st.min_nodes, g.node_count);
        st.max_nodes = std::max(st.max_nodes, g.node_count);
        if (g.label < st.class_counts.size()) ++st.class_counts[g.label];
    }
    st.avg_nodes = nodes / double(set.size());
    st.avg_edges = edges / double(set.size());
    return st;
}

}  // namespace simba
