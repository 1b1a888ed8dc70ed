#include "simba/analysis.hpp"

#include <algorithm>
#include <numeric>

#include "simba/errors.hpp"
#include "simba/metrics.hpp"
#include "simba/partition.hpp"
#include "simba/rng.hpp"

namespace simba {

std::string to_string(Sampling s) {
    switch (s) {
        case Sampling::All: return "all";
        case Sampling::LongTailed: return "long-tailed";
        case Sampling::Balanced: return "balanced";
    }
    return "all";
}

Sampling parse_sampling(const std::string& s) {
    if (s == "all") return Sampling::All;
    if (s == "long-tailed") return Sampling::LongTailed;
    if (s == "balanced") return Sampling::Balanced;
    throw ArgumentError("unknown sampling '" + s + "' (expected all, long-tailed or balanced)");
}

std::vector<std::size_t> sample_graphs(const GraphSet& set, Sampling sampling, std::size_t count,
                                       std::uint64_t seed) {
    const std::size_t n = set.size();
    std::vector<std::size_t> ids(n);
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    if (sampling == Sampling::All || count == 0 || count >= n) return ids;

    if (sampling == Sampling::LongTailed) {
        Rng rng(seed);
        rng.shuffle(ids);
        ids.resize(count);
        std::sort(ids.begin(), ids.end());
        return ids;
    }

    auto sizes = set.sizes();
    std::stable_sort(ids.begin(), ids.end(), [&](std::size_t a, std::size_t b) { return sizes[a] < sizes[b]; });
    std::size_t best = 0;
    double best_ratio = -1.0;
    for (std::size_t s = 0; s + count <= n; ++s) {
        double lo = std::max<double>(1.0, static_cast<double>(sizes[ids[s]]));
        double ratio = static_cast<double>(sizes[ids[s + count - 1]]) / lo;
        if (best_ratio < 0.0 || ratio < best_ratio) {
            best_ratio = ratio;
            best = s;
        }
    }
    std::vector<std::size_t> out(ids.begin() + static_cast<std::ptrdiff_t>(best),
                                 ids.begin() + static_cast<std::ptrdiff_t>(best + count));
    std::sort(out.begin(), out.end());
    return out;
}

GraphSet subset(const GraphSet& set, const std::vector<std::size_t>& ids) {
    GraphSet out;
    out.name = set.name;
    out.num_classes = set.num_classes;
    out.feature_dim = set.feature_dim;
    out.graphs.reserve(ids.size());
    for (std::size_t id : ids) {
        if (id >= set.size()) throw ArgumentError("graph id out of range: " + std::to_string(id));
        out.graphs.push_back(set.graphs[id]);
    }
    return out;
}

HeadTailCmd head_tail_cmd(const GraphSet& sample, const Tensor& embeddings, double head_fraction,
                          std::size_t moments) {
    if (embeddings.rows() != sample.size())
        throw DimensionError("embedding rows do not match the sample size");
    HeadTail ht = head_tail_split(sample, head_fraction);
    Tensor head(ht.head.size(), embeddings.cols());
    Tensor tail(ht.tail.size(), embeddings.cols());
    for (std::size_t i = 0; i < ht.head.size(); ++i) {
        auto r = embeddings.row(ht.head[i]);
        std::copy(r.begin(), r.end(), head.row(i).begin());
    }
    for (std::size_t i = 0; i < ht.tail.size(); ++i) {
        auto r = embeddings.row(ht.tail[i]);
        std::copy(r.begin(), r.end(), tail.row(i).begin());
    }
    HeadTailCmd out;
    out.cmd = cmd_metric(head, tail, moments);
    out.sir = compute_sir(sample, ht.head, ht.tail);
    out.head = ht.head.size();
    out.tail = ht.tail.size();
    return out;
}

}  // namespace simba
