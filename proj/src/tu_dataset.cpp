#include "simba/tu_dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <string_view>

#include "simba/errors.hpp"

namespace simba {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

class LineReader {
public:
    explicit LineReader(const fs::path& path) : path_(path), in_(path) {
        if (!in_) throw ParseError("missing file " + path.string());
    }

    // Skips blank lines; returns false at end of file.
    bool next(std::string& line) {
        while (std::getline(in_, line)) {
            ++lineno_;
            if (!trim(line).empty()) return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& what, std::string_view token) const {
        throw FormatError(path_.filename().string() + ":" + std::to_string(lineno_) + ": " + what + " '" +
                          std::string(token) + "'");
    }

    long long to_int(std::string_view tok) const {
        tok = trim(tok);
        long long v = 0;
        const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || p != tok.data() + tok.size() || tok.empty()) fail("expected integer, got", tok);
        return v;
    }

    double to_real(std::string_view tok) const {
        tok = trim(tok);
        double v = 0;
        const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || p != tok.data() + tok.size() || tok.empty()) fail("expected number, got", tok);
        return v;
    }

    std::size_t line() const { return lineno_; }

private:
    fs::path path_;
    std::ifstream in_;
    std::size_t lineno_ = 0;
};

fs::path file_for(const fs::path& dir, const std::string& name, const char* suffix) {
    return dir / (name + "_" + suffix + ".txt");
}

}  // namespace

GraphSet parse_tu_dataset(const fs::path& directory, const std::string& name, const ParseOptions& options) {
    const fs::path a_path = file_for(directory, name, "A");
    const fs::path ind_path = file_for(directory, name, "graph_indicator");
    const fs::path lab_path = file_for(directory, name, "graph_labels");
    const fs::path nl_path = file_for(directory, name, "node_labels");
    const fs::path na_path = file_for(directory, name, "node_attributes");
    for (const auto& p : {a_path, ind_path, lab_path}) {
        if (!fs::exists(p)) throw ParseError("missing file " + p.string());
    }

    std::string line;

    // Node -> graph indicator.
    std::vector<std::size_t> node_graph;  // 0-based graph id per global node
    {
        LineReader r(ind_path);
        while (r.next(line)) {
            const long long g = r.to_int(line);
            if (g < 1) r.fail("graph id must be >= 1, got", line);
            node_graph.push_back(std::size_t(g - 1));
        }
    }
    if (node_graph.empty()) throw ConsistencyError(ind_path.filename().string() + " lists no nodes");

    // Graph labels.
    std::vector<long long> raw_labels;
    {
        LineReader r(lab_path);
        while (r.next(line)) raw_labels.push_back(r.to_int(line));
    }
    const std::size_t graph_count = raw_labels.size();
    std::vector<std::size_t> local_index(node_graph.size());
    std::vector<std::size_t> counts(graph_count, 0);
    for (std::size_t v = 0; v < node_graph.size(); ++v) {
        if (node_graph[v] >= graph_count) {
            throw ConsistencyError("node " + std::to_string(v + 1) + " belongs to graph " +
                                   std::to_string(node_graph[v] + 1) + " but only " + std::to_string(graph_count) +
                                   " graph labels exist");
        }
        local_index[v] = counts[node_graph[v]]++;
    }
    for (std::size_t g = 0; g < graph_count; ++g) {
        if (counts[g] == 0) throw ConsistencyError("graph " + std::to_string(g + 1) + " has no nodes");
    }

    GraphSet set;
    set.name = name;
    set.graphs.resize(graph_count);
    {
        std::map<long long, std::size_t> remap;
        for (long long l : raw_labels) remap.emplace(l, 0);
        std::size_t next = 0;
        for (auto& [raw, dense] : remap) dense = next++;
        set.num_classes = remap.size();
        for (std::size_t g = 0; g < graph_count; ++g) {
            set.graphs[g].node_count = counts[g];
            set.graphs[g].label = remap.at(raw_labels[g]);
        }
    }

    // Edges.
    {
        LineReader r(a_path);
        while (r.next(line)) {
            const auto toks = split_commas(line);
            if (toks.size() != 2) r.fail("expected 'i, j', got", line);
            const long long i = r.to_int(toks[0]);
            const long long j = r.to_int(toks[1]);
            const auto n = (long long)node_graph.size();
            if (i < 1 || j < 1 || i > n || j > n) {
                throw ConsistencyError(a_path.filename().string() + ":" + std::to_string(r.line()) + ": node id out of range");
            }
            const std::size_t gi = node_graph[std::size_t(i - 1)];
            const std::size_t gj = node_graph[std::size_t(j - 1)];
            if (gi != gj) {
                throw ConsistencyError(a_path.filename().string() + ":" + std::to_string(r.line()) + ": edge (" +
                                       std::to_string(i) + ", " + std::to_string(j) + ") crosses graphs " +
                                       std::to_string(gi + 1) + " and " + std::to_string(gj + 1));
            }
            set.graphs[gi].edges.emplace_back(std::uint32_t(local_index[std::size_t(i - 1)]),
                                              std::uint32_t(local_index[std::size_t(j - 1)]));
        }
    }
    for (auto& g : set.graphs) normalize_edges(g);

    // Optional node files.
    std::optional<std::vector<long long>> node_labels;
    if (fs::exists(nl_path)) {
        LineReader r(nl_path);
        std::vector<long long> v;
        while (r.next(line)) v.push_back(r.to_int(split_commas(line).front()));
        if (v.size() != node_graph.size()) {
            throw ConsistencyError(nl_path.filename().string() + " has " + std::to_string(v.size()) +
                                   " lines for " + std::to_string(node_graph.size()) + " nodes");
        }
        node_labels = std::move(v);
    }
    std::optional<Tensor> attributes;
    if (fs::exists(na_path)) {
        LineReader r(na_path);
        std::vector<double> data;
        std::size_t width = 0, rows = 0;
        while (r.next(line)) {
            const auto toks = split_commas(line);
            if (rows == 0) width = toks.size();
            if (toks.size() != width) r.fail("inconsistent attribute count in", line);
            for (auto t : toks) data.push_back(r.to_real(t));
            ++rows;
        }
        if (rows != node_graph.size()) {
            throw ConsistencyError(na_path.filename().string() + " has " + std::to_string(rows) + " lines for " +
                                   std::to_string(node_graph.size()) + " nodes");
        }
        attributes = Tensor(rows, width, std::move(data));
    }

    bool use_labels = false, use_attrs = false, use_degree = false;
    switch (options.features) {
        case FeatureMode::Auto:
            use_labels = node_labels.has_value();
            use_attrs = attributes.has_value();
            use_degree = !use_labels && !use_attrs;
            break;
        case FeatureMode::NodeLabels:
            if (!node_labels) throw ParseError("missing file " + nl_path.string());
            use_labels = true;
            break;
        case FeatureMode::Attributes:
            if (!attributes) throw ParseError("missing file " + na_path.string());
            use_attrs = true;
            break;
        case FeatureMode::Degree:
            use_degree = true;
            break;
    }

    std::map<long long, std::size_t> label_slot;
    if (use_labels) {
        for (long long l : *node_labels) label_slot.emplace(l, 0);
        std::size_t next = 0;
        for (auto& [raw, slot] : label_slot) slot = next++;
    }
    const std::size_t label_width = label_slot.size();
    const std::size_t attr_width = use_attrs ? attributes->cols() : 0;
    const std::size_t width = use_degree ? 2 : label_width + attr_width;
    set.feature_dim = width;

    std::vector<std::vector<std::size_t>> degrees;
    double max_degree = 0.0;
    if (use_degree) {
        for (const auto& g : set.graphs) {
            degrees.push_back(g.degrees());
            for (std::size_t d : degrees.back()) max_degree = std::max(max_degree, double(d));
        }
    }

    for (auto& g : set.graphs) g.features = Tensor(g.node_count, width);
    for (std::size_t v = 0; v < node_graph.size(); ++v) {
        Graph& g = set.graphs[node_graph[v]];
        auto row = g.features.row(local_index[v]);
        if (use_degree) {
            row[0] = 1.0;
            const double d = double(degrees[node_graph[v]][local_index[v]]);
            row[1] = max_degree > 0.0 ? d / max_degree : 0.0;
            continue;
        }
        if (use_labels) row[label_slot.at((*node_labels)[v])] = 1.0;
        if (use_attrs) {
            auto src = attributes->row(v);
            std::copy(src.begin(), src.end(), row.begin() + std::ptrdiff_t(label_width));
        }
    }
    return set;
}

void write_tu_dataset(const GraphSet& set, const fs::path& directory, const std::string& name) {
    fs::create_directories(directory);
    auto open = [&](const char* suffix) {
        std::ofstream out(file_for(directory, name, suffix));
        if (!out) throw ParseError("cannot write " + file_for(directory, name, suffix).string());
        return out;
    };
    auto a = open("A");
    auto ind = open("graph_indicator");
    auto lab = open("graph_labels");
    auto attr = open("node_attributes");
    std::size_t base = 1;
    char buf[40];
    for (std::size_t gi = 0; gi < set.graphs.size(); ++gi) {
        const Graph& g = set.graphs[gi];
        for (const auto& [u, v] : g.edges) {
            a << base + u << ", " << base + v << '\n';
            a << base + v << ", " << base + u << '\n';
        }
        for (std::size_t v = 0; v < g.node_count; ++v) {
            ind << gi + 1 << '\n';
            auto row = g.features.row(v);
            for (std::size_t c = 0; c < row.size(); ++c) {
                std::snprintf(buf, sizeof buf, "%.17g", row[c]);
                attr << (c ? ", " : "") << buf;
            }
            attr << '\n';
        }
        lab << g.label << '\n';
        base += g.node_count;
    }
}

}  // namespace simba
