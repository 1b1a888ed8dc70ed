#include "simba/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "simba/errors.hpp"
#include "simba/rng.hpp"

namespace simba {

namespace {

struct Motif {
    std::size_t nodes;
    std::vector<Edge> edges;
};

const std::vector<Motif>& motif_library() {
    static const std::vector<Motif> lib = {
        {4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}},
        {5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}}},
        {5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}}},
        {5, {{0, 2}, {0, 3}, {0, 4}, {1, 2}, {1, 3}, {1, 4}}},
    };
    return lib;
}

std::size_t sample_size(const std::vector<double>& cdf, std::size_t min_size, Rng& rng) {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const std::size_t k = std::min<std::size_t>(std::size_t(it - cdf.begin()), cdf.size() - 1);
    return min_size + k;
}

}  // namespace

std::vector<double> truncated_powerlaw_pmf(double exponent, std::size_t min_size, std::size_t max_size) {
    if (min_size == 0 || max_size < min_size) {
        throw ArgumentError("size range must satisfy 1 <= min <= max");
    }
    std::vector<double> pmf;
    double z = 0.0;
    for (std::size_t n = min_size; n <= max_size; ++n) {
        pmf.push_back(std::pow(double(n), -exponent));
        z += pmf.back();
    }
    for (double& p : pmf) p /= z;
    return pmf;
}

std::size_t motif_node_count(MotifRule rule, std::size_t classes) {
    if (rule == MotifRule::Trivial) return 0;
    std::size_t m = 0;
    for (std::size_t c = 0; c < classes && c < motif_library().size(); ++c) m = std::max(m, motif_library()[c].nodes);
    return m;
}

GraphSet synth_powerlaw_set(const SynthConfig& cfg) {
    if (cfg.min_size < 3) throw ArgumentError("synthetic sets need min_size >= 3");
    if (cfg.max_size < cfg.min_size) throw ArgumentError("synthetic size range is empty");
    if (cfg.classes < 2) throw ArgumentError("synthetic sets need at least 2 classes");
    if (cfg.graphs < cfg.classes) throw ArgumentError("fewer graphs than classes");
    if (cfg.node_types == 0) throw ArgumentError("node_types must be >= 1");
    if (cfg.motif == MotifRule::Motifs) {
        if (cfg.classes > motif_library().size()) {
            throw ArgumentError("motif rule supports at most " + std::to_string(motif_library().size()) + " classes");
        }
        const std::size_t need = motif_node_count(cfg.motif, cfg.classes);
        if (cfg.min_size < need) {
            throw ArgumentError("motif needs " + std::to_string(need) + " nodes but min_size is " +
                                std::to_string(cfg.min_size));
        }
    }

    Rng rng(cfg.seed);
    const auto pmf = truncated_powerlaw_pmf(cfg.exponent, cfg.min_size, cfg.max_size);
    std::vector<double> cdf(pmf.size());
    std::partial_sum(pmf.begin(), pmf.end(), cdf.begin());
    cdf.back() = 1.0;

    std::vector<std::size_t> labels(cfg.graphs);
    for (std::size_t i = 0; i < cfg.graphs; ++i) labels[i] = i % cfg.classes;
    rng.shuffle(labels);

    GraphSet set;
    set.name = "SYNTH";
    set.num_classes = cfg.classes;
    set.feature_dim = cfg.node_types + (cfg.motif == MotifRule::Trivial ? cfg.classes : 0);
    set.graphs.reserve(cfg.graphs);

    for (std::size_t gi = 0; gi < cfg.graphs; ++gi) {
        Graph g;
        g.label = labels[gi];
        g.node_count = sample_size(cdf, cfg.min_size, rng);
        const std::size_t n = g.node_count;
        for (std::size_t v = 1; v < n; ++v) {
            g.edges.emplace_back(std::uint32_t(rng.index(v)), std::uint32_t(v));
        }
        const auto extra = std::size_t(std::llround(cfg.extra_edge_ratio * double(n)));
        for (std::size_t e = 0; e < extra; ++e) {
            g.edges.emplace_back(std::uint32_t(rng.index(n)), std::uint32_t(rng.index(n)));
        }
        if (cfg.motif == MotifRule::Motifs) {
            const Motif& m = motif_library()[g.label];
            std::vector<std::uint32_t> pool(n);
            std::iota(pool.begin(), pool.end(), 0u);
            for (std::size_t k = 0; k < m.nodes; ++k) {
                std::swap(pool[k], pool[k + std::size_t(rng.index(n - k))]);
            }
            for (const auto& [a, b] : m.edges) g.edges.emplace_back(pool[a], pool[b]);
        }
        normalize_edges(g);
        g.features = Tensor(n, set.feature_dim);
        for (std::size_t v = 0; v < n; ++v) {
            g.features(v, std::size_t(rng.index(cfg.node_types))) = 1.0;
            if (cfg.motif == MotifRule::Trivial) g.features(v, cfg.node_types + g.label) = 1.0;
        }
        set.graphs.push_back(std::move(g));
    }
    return set;
}

}  // namespace simba
