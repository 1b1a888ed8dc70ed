#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "simba/tensor.hpp"

namespace simba {

using Edge = std::pair<std::uint32_t, std::uint32_t>;

// One graph instance. Edges are undirected and stored once as (u, v) with
// u < v, sorted and unique; self-loops are dropped on normalization.
struct Graph {
    std::size_t node_count = 0;
    std::vector<Edge> edges;
    Tensor features;  // node_count x d
    std::size_t label = 0;

    std::size_t edge_count() const { return edges.size(); }
    std::vector<std::size_t> degrees() const;

    bool operator==(const Graph&) const = default;
};

// Sorts, orients (u < v), deduplicates and drops self-loops. Throws
// ConsistencyError for endpoints >= node_count.
void normalize_edges(Graph& g);

struct Splits {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;

    bool operator==(const Splits&) const = default;
};

struct GraphSet {
    std::string name;
    std::vector<Graph> graphs;
    std::size_t num_classes = 0;
    std::size_t feature_dim = 0;
    std::vector<std::size_t> head_ids;
    std::vector<std::size_t> tail_ids;
    Splits splits;

    std::size_t size() const { return graphs.size(); }
    std::vector<std::size_t> sizes() const;
    std::vector<std::size_t> labels() const;
};

// Checks the structural invariants (edge ranges, canonical edge order,
// feature shapes, label range, head/tail and split coverage when present).
// Throws ConsistencyError.
void validate(const GraphSet& set);

// Table-style dataset summary.
struct DatasetStats {
    std::size_t graphs = 0;
    std::size_t classes = 0;
    std::size_t feature_dim = 0;
    double avg_nodes = 0.0;
    double avg_edges = 0.0;
    std::size_t min_nodes = 0;
    std::size_t max_nodes = 0;
    std::vector<std::size_t> class_counts;
};

DatasetStats describe(const GraphSet& set);

}  // namespace simba
