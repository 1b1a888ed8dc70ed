#pragma once

#include <cstdint>
#include <vector>

#include "simba/graph.hpp"

namespace simba {

enum class MotifRule {
    // Node features carry a one-hot class marker; trivially separable.
    Trivial,
    // Class c plants motif c on random nodes of a sparse random base graph:
    // 0 = 4-clique, 1 = 5-cycle, 2 = 4-leaf star, 3 = complete bipartite K(2,3).
    Motifs,
};

struct SynthConfig {
    std::size_t graphs = 500;
    double exponent = 2.0;  // P(n) proportional to n^-exponent on [min_size, max_size]
    std::size_t min_size = 5;
    std::size_t max_size = 200;
    std::size_t classes = 2;
    MotifRule motif = MotifRule::Motifs;
    std::uint64_t seed = 0;
    std::size_t node_types = 3;        // one-hot node type width
    double extra_edge_ratio = 0.1;     // extra random edges per node on top of a random tree
};

// Probability mass of the truncated power law on [min_size, max_size].
std::vector<double> truncated_powerlaw_pmf(double exponent, std::size_t min_size, std::size_t max_size);

// Largest motif used for the given class count (nodes), 0 for MotifRule::Trivial.
std::size_t motif_node_count(MotifRule rule, std::size_t classes);

// Generates a labelled multi-graph set with power-law sizes. Labels are
// balanced (round robin, then shuffled). Deterministic per seed.
GraphSet synth_powerlaw_set(const SynthConfig& config);

}  // namespace simba
