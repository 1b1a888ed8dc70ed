#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>

#include "simba/graph.hpp"

namespace simba {

struct HeadTail {
    std::vector<std::size_t> head;
    std::vector<std::size_t> tail;
};

// Splits graphs into the largest ("head") and the rest ("tail") by node count.
//
// Graphs are ordered by size descending, ties by ascending index. The target
// head count is floor(head_fraction * N), at least 1 and at most N - 1. If the
// cut falls inside a run of equal sizes, the whole run goes to the tail (the
// head shrinks). If that would empty the head, the cut moves down to the end
// of the first run instead; if every graph has the same size, the positional
// cut is kept. `head_count` overrides the target and is applied positionally.
HeadTail head_tail_split(const GraphSet& set, double head_fraction,
                         std::optional<std::size_t> head_count = std::nullopt);

// Stores the partition into set.head_ids / set.tail_ids.
void assign_head_tail(GraphSet& set, double head_fraction, std::optional<std::size_t> head_count = std::nullopt);

// Size-imbalanced ratio: mean head size / mean tail size.
double compute_sir(const GraphSet& set);
double compute_sir(const GraphSet& set, std::span<const std::size_t> head, std::span<const std::size_t> tail);
inline double log2_sir(const GraphSet& set) { return std::log2(compute_sir(set)); }

// Per-class shuffled split. Each class of size n_c is divided by largest
// remainder of n_c * ratio_i / sum(ratios) (remainder ties go to the earlier
// split), so per-class deviation from the ideal is below one instance.
Splits stratified_split(const GraphSet& set, std::array<double, 3> ratios, std::uint64_t seed);

}  // namespace simba
