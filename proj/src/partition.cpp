#include "simba/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "simba/errors.hpp"
#include "simba/rng.hpp"

namespace simba {

HeadTail head_tail_split(const GraphSet& set, double head_fraction, std::optional<std::size_t> head_count) {
    if (!(head_fraction > 0.0 && head_fraction < 1.0)) {
        throw ArgumentError("head_fraction must lie in (0, 1)");
    }
    const std::size_t n = set.size();
    if (n < 2) {
        throw ArgumentError("head/tail split needs at least two graphs");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return set.graphs[a].node_count > set.graphs[b].node_count;
    });
    auto size_at = [&](std::size_t pos) { return set.graphs[order[pos]].node_count; };

    std::size_t cut = 0;
    if (head_count) {
        if (*head_count < 1 || *head_count >= n) {
            throw ArgumentError("head count must lie in [1, N-1]");
        }
        cut = *head_count;
    } else {
        const auto target = std::size_t(std::floor(head_fraction * double(n) + 1e-9));
        cut = std::clamp<std::size_t>(target, 1, n - 1);
        const std::size_t positional = cut;
        while (cut > 0 && size_at(cut - 1) == size_at(cut)) --cut;
        if (cut == 0) {
            cut = positional;
            while (cut < n && size_at(cut - 1) == size_at(cut)) ++cut;
            if (cut == n) cut = positional;
        }
    }
    HeadTail ht;
    ht.head.assign(order.begin(), order.begin() + std::ptrdiff_t(cut));
    ht.tail.assign(order.begin() + std::ptrdiff_t(cut), order.end());
    std::sort(ht.head.begin(), ht.head.end());
    std::sort(ht.tail.begin(), ht.tail.end());
    return ht;
}

void assign_head_tail(GraphSet& set, double head_fraction, std::optional<std::size_t> head_count) {
    auto ht = head_tail_split(set, head_fraction, head_count);
    set.head_ids = std::move(ht.head);
    set.tail_ids = std::move(ht.tail);
}

double compute_sir(const GraphSet& set, std::span<const std::size_t> head, std::span<const std::size_t> tail) {
    if (head.empty() || tail.empty()) {
        throw ArgumentError("SIR needs non-empty head and tail partitions");
    }
    auto mean = [&](std::span<const std::size_t> ids) {
        double s = 0.0;
        for (std::size_t i : ids) s += double(set.graphs.at(i).node_count);
        return s / double(ids.size());
    };
    return mean(head) / mean(tail);
}

double compute_sir(const GraphSet& set) { return compute_sir(set, set.head_ids, set.tail_ids); }

Splits stratified_split(const GraphSet& set, std::array<double, 3> ratios, std::uint64_t seed) {
    const double total = ratios[0] + ratios[1] + ratios[2];
    if (!(ratios[0] >= 0 && ratios[1] >= 0 && ratios[2] >= 0 && total > 0)) {
        throw ArgumentError("split ratios must be non-negative with a positive sum");
    }
    std::vector<std::vector<std::size_t>> by_class(set.num_classes);
    for (std::size_t i = 0; i < set.size(); ++i) {
        by_class.at(set.graphs[i].label).push_back(i);
    }
    Rng rng(seed);
    Splits out;
    std::array<std::vector<std::size_t>*, 3> dst{&out.train, &out.val, &out.test};
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        auto& ids = by_class[c];
        if (ids.size() < 3) {
            throw SplitError("class " + std::to_string(c) + " has " + std::to_string(ids.size()) +
                             " graphs; stratified split needs at least 3");
        }
        rng.shuffle(ids);
        const double n = double(ids.size());
        std::array<std::size_t, 3> take{};
        std::array<double, 3> frac{};
        std::size_t assigned = 0;
        for (int s = 0; s < 3; ++s) {
            const double ideal = n * ratios[s] / total;
            take[s] = std::size_t(std::floor(ideal + 1e-9));
            frac[s] = ideal - double(take[s]);
            assigned += take[s];
        }
        std::array<int, 3> order{0, 1, 2};
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return frac[a] > frac[b] + 1e-12; });
        for (std::size_t k = 0; assigned < ids.size(); ++k, ++assigned) ++take[order[k % 3]];
        std::size_t pos = 0;
        for (int s = 0; s < 3; ++s) {
            dst[s]->insert(dst[s]->end(), ids.begin() + std::ptrdiff_t(pos), ids.begin() + std::ptrdiff_t(pos + take[s]));
            pos += take[s];
        }
    }
    for (auto* d : dst) std::sort(d->begin(), d->end());
    return out;
}

}  // namespace simba
