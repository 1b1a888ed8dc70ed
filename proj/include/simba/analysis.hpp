#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "simba/graph.hpp"
#include "simba/tensor.hpp"

namespace simba {

enum class Sampling {
    All,         // every graph
    LongTailed,  // uniform random subset, keeps the skewed size distribution
    Balanced,    // contiguous window in size order with the smallest max/min size ratio
};

std::string to_string(Sampling s);
Sampling parse_sampling(const std::string& s);

// Graph ids of a sample of `count` graphs (count = 0 or >= N means all).
std::vector<std::size_t> sample_graphs(const GraphSet& set, Sampling sampling, std::size_t count,
                                       std::uint64_t seed);

// Sub-set made of the listed graphs (head/tail and splits are cleared).
GraphSet subset(const GraphSet& set, const std::vector<std::size_t>& ids);

struct HeadTailCmd {
    double cmd = 0.0;
    double sir = 0.0;
    std::size_t head = 0;
    std::size_t tail = 0;
};

// Partitions the sample into head/tail by size and measures the central
// moment discrepancy between the two embedding sets. `embeddings` holds one
// row per sampled graph.
HeadTailCmd head_tail_cmd(const GraphSet& sample, const Tensor& embeddings, double head_fraction,
                          std::size_t moments = 5);

}  // namespace simba
