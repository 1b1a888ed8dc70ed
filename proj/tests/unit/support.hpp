#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "simba/graph.hpp"
#include "simba/rng.hpp"
#include "simba/tensor.hpp"

namespace test {

inline simba::Tensor random_tensor(std::size_t rows, std::size_t cols, simba::Rng& rng, double lo = -1.0,
                                   double hi = 1.0) {
    simba::Tensor t(rows, cols);
    for (auto& x : t.data()) x = rng.uniform(lo, hi);
    return t;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& tag) {
    static int counter = 0;
    auto dir = std::filesystem::temp_directory_path() /
               ("simba-test-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline simba::Graph make_graph(std::size_t n, std::vector<simba::Edge> edges, simba::Tensor features,
                               std::size_t label = 0) {
    simba::Graph g;
    g.node_count = n;
    g.edges = std::move(edges);
    g.features = std::move(features);
    g.label = label;
    simba::normalize_edges(g);
    return g;
}

// Random connected-ish graph with one-hot features of width d.
inline simba::Graph random_graph(std::size_t n, std::size_t d, simba::Rng& rng, double extra = 0.3) {
    std::vector<simba::Edge> edges;
    for (std::size_t v = 1; v < n; ++v)
        edges.emplace_back(std::uint32_t(rng.index(v)), std::uint32_t(v));
    const auto more = std::size_t(extra * double(n));
    for (std::size_t i = 0; i < more && n > 1; ++i) {
        auto a = std::uint32_t(rng.index(n));
        auto b = std::uint32_t(rng.index(n));
        edges.emplace_back(a, b);
    }
    simba::Tensor x(n, d);
    for (std::size_t v = 0; v < n; ++v) x(v, rng.index(d)) = 1.0;
    return make_graph(n, std::move(edges), std::move(x));
}

// Graph with nodes relabelled by perm (new id of old node v is perm[v]).
inline simba::Graph permute(const simba::Graph& g, const std::vector<std::size_t>& perm) {
    std::vector<simba::Edge> edges;
    for (auto [u, v] : g.edges) edges.emplace_back(std::uint32_t(perm[u]), std::uint32_t(perm[v]));
    simba::Tensor x(g.node_count, g.features.cols());
    for (std::size_t v = 0; v < g.node_count; ++v) {
        auto src = g.features.row(v);
        std::copy(src.begin(), src.end(), x.row(perm[v]).begin());
    }
    return make_graph(g.node_count, std::move(edges), std::move(x), g.label);
}

inline simba::GraphSet set_with_sizes(const std::vector<std::size_t>& sizes, std::size_t classes = 2) {
    simba::GraphSet set;
    set.name = "sizes";
    set.num_classes = classes;
    set.feature_dim = 1;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        simba::Graph g;
        g.node_count = sizes[i];
        g.features = simba::Tensor(sizes[i], 1, 1.0);
        g.label = i % classes;
        set.graphs.push_back(std::move(g));
    }
    return set;
}

}  // namespace test
