#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "simba/errors.hpp"
#include "simba/partition.hpp"
#include "simba/synthetic.hpp"
#include "simba/tu_dataset.hpp"
#include "support.hpp"

using namespace simba;

namespace {

// Triangle (nodes 1-3) and a single edge (nodes 4-5), 1-based as in the TU layout.
std::filesystem::path write_fixture(const std::string& tag) {
    auto dir = test::temp_dir(tag);
    test::write_file(dir / "FIX_A.txt", "1, 2\n2, 1\n2, 3\n3, 2\n1, 3\n3, 1\n4, 5\n5, 4\n");
    test::write_file(dir / "FIX_graph_indicator.txt", "1\n1\n1\n2\n2\n");
    test::write_file(dir / "FIX_graph_labels.txt", "-1\n1\n");
    test::write_file(dir / "FIX_node_labels.txt", "0\n2\n0\n1\n1\n");
    return dir;
}

}  // namespace

TEST_CASE("parse hand-written fixture") {
    auto dir = write_fixture("fixture");
    GraphSet set = parse_tu_dataset(dir, "FIX");
    REQUIRE(set.size() == 2);
    CHECK(set.sizes() == std::vector<std::size_t>{3, 2});
    CHECK(set.graphs[0].edge_count() == 3);
    CHECK(set.graphs[1].edge_count() == 1);
    CHECK(set.num_classes == 2);
    CHECK(set.graphs[0].label == 0);
    CHECK(set.graphs[1].label == 1);

    // node labels {0, 1, 2} one-hot
    CHECK(set.feature_dim == 3);
    CHECK(set.graphs[0].features.row(1)[2] == 1.0);
    CHECK(set.graphs[1].features.row(0)[1] == 1.0);
    validate(set);
}

TEST_CASE("graph without edges is preserved") {
    auto dir = test::temp_dir("noedges");
    test::write_file(dir / "E_A.txt", "1, 2\n2, 1\n");
    test::write_file(dir / "E_graph_indicator.txt", "1\n1\n2\n");
    test::write_file(dir / "E_graph_labels.txt", "0\n1\n");
    GraphSet set = parse_tu_dataset(dir, "E");
    REQUIRE(set.size() == 2);
    CHECK(set.graphs[1].node_count == 1);
    CHECK(set.graphs[1].edges.empty());
    // degree features: [1, deg / max deg]
    CHECK(set.feature_dim == 2);
    CHECK(set.graphs[1].features(0, 1) == 0.0);
    CHECK(set.graphs[0].features(0, 1) == 1.0);
}

TEST_CASE("parse errors name the file") {
    auto dir = write_fixture("errors");
    SUBCASE("missing file") {
        std::filesystem::remove(dir / "FIX_graph_labels.txt");
        try {
            parse_tu_dataset(dir, "FIX");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("FIX_graph_labels.txt") != std::string::npos);
        }
    }
    SUBCASE("malformed line") {
        test::write_file(dir / "FIX_A.txt", "1, 2\n2; x\n");
        try {
            parse_tu_dataset(dir, "FIX");
            FAIL("expected FormatError");
        } catch (const FormatError& e) {
            CHECK(std::string(e.what()).find("FIX_A.txt:2") != std::string::npos);
        }
    }
    SUBCASE("edge across graphs") {
        test::write_file(dir / "FIX_A.txt", "1, 4\n");
        CHECK_THROWS_AS(parse_tu_dataset(dir, "FIX"), ConsistencyError);
    }
    SUBCASE("node id out of range") {
        test::write_file(dir / "FIX_A.txt", "1, 9\n");
        CHECK_THROWS_AS(parse_tu_dataset(dir, "FIX"), ConsistencyError);
    }
    SUBCASE("label count mismatch") {
        test::write_file(dir / "FIX_graph_labels.txt", "1\n");
        CHECK_THROWS_AS(parse_tu_dataset(dir, "FIX"), DataError);
    }
}

TEST_CASE("round trip through the TU layout") {
    SynthConfig cfg;
    cfg.graphs = 60;
    cfg.max_size = 40;
    cfg.classes = 3;
    cfg.seed = 11;
    GraphSet set = synth_powerlaw_set(cfg);
    auto dir = test::temp_dir("roundtrip");
    write_tu_dataset(set, dir, "RT");
    GraphSet back = parse_tu_dataset(dir, "RT");
    REQUIRE(back.size() == set.size());
    CHECK(back.num_classes == set.num_classes);
    CHECK(back.feature_dim == set.feature_dim);
    for (std::size_t i = 0; i < set.size(); ++i) CHECK(back.graphs[i] == set.graphs[i]);

    // and again: writing the re-parsed set reproduces the same files
    auto dir2 = test::temp_dir("roundtrip2");
    write_tu_dataset(back, dir2, "RT");
    for (const char* f : {"RT_A.txt", "RT_graph_indicator.txt", "RT_graph_labels.txt", "RT_node_attributes.txt"})
        CHECK(test::read_file(dir / f) == test::read_file(dir2 / f));
}

TEST_CASE("head/tail split") {
    SUBCASE("distinct sizes") {
        GraphSet set = test::set_with_sizes({3, 9, 4, 10, 1, 5, 6, 2, 8, 7});
        HeadTail ht = head_tail_split(set, 0.2);
        std::sort(ht.head.begin(), ht.head.end());
        CHECK(ht.head == std::vector<std::size_t>{1, 3});
        CHECK(ht.tail.size() == 8);
    }
    SUBCASE("2000 graphs give a head of 400") {
        std::vector<std::size_t> sizes(2000);
        for (std::size_t i = 0; i < sizes.size(); ++i) sizes[i] = 1 + (i * 7919) % 2000;
        GraphSet set = test::set_with_sizes(sizes);
        CHECK(head_tail_split(set, 0.2).head.size() == 400);
    }
    SUBCASE("boundary tie") {
        GraphSet set = test::set_with_sizes({5, 5, 5, 1, 1});
        HeadTail ht = head_tail_split(set, 0.2);
        // oracle: every cut position c (head = c largest) that does not split a
        // run of equal sizes
        std::vector<std::size_t> sorted = set.sizes();
        std::sort(sorted.rbegin(), sorted.rend());
        std::vector<std::size_t> valid;
        for (std::size_t c = 1; c < sorted.size(); ++c)
            if (sorted[c - 1] > sorted[c]) valid.push_back(c);
        CHECK(std::find(valid.begin(), valid.end(), ht.head.size()) != valid.end());
        std::size_t head_min = SIZE_MAX, tail_max = 0;
        for (auto i : ht.head) head_min = std::min(head_min, set.graphs[i].node_count);
        for (auto i : ht.tail) tail_max = std::max(tail_max, set.graphs[i].node_count);
        CHECK(head_min >= tail_max);
        CHECK(ht.head.size() == 3);
    }
    SUBCASE("tie shrinks the head") {
        GraphSet set = test::set_with_sizes({9, 7, 7, 7, 1, 1, 1, 1, 1, 1});
        HeadTail ht = head_tail_split(set, 0.2);
        CHECK(ht.head == std::vector<std::size_t>{0});
    }
    SUBCASE("explicit head count") {
        GraphSet set = test::set_with_sizes({4, 3, 2, 1});
        HeadTail ht = head_tail_split(set, 0.2, 2);
        CHECK(ht.head == std::vector<std::size_t>{0, 1});
    }
    SUBCASE("order property on random sets") {
        Rng rng(3);
        for (int trial = 0; trial < 200; ++trial) {
            std::size_t n = 2 + rng.index(40);
            std::vector<std::size_t> sizes(n);
            for (auto& s : sizes) s = 1 + rng.index(12);
            GraphSet set = test::set_with_sizes(sizes);
            HeadTail ht = head_tail_split(set, 0.2);
            REQUIRE(!ht.head.empty());
            REQUIRE(!ht.tail.empty());
            CHECK(ht.head.size() + ht.tail.size() == n);
            std::size_t head_min = SIZE_MAX, tail_max = 0;
            for (auto i : ht.head) head_min = std::min(head_min, sizes[i]);
            for (auto i : ht.tail) tail_max = std::max(tail_max, sizes[i]);
            bool all_equal = std::all_of(sizes.begin(), sizes.end(), [&](auto s) { return s == sizes[0]; });
            if (!all_equal) CHECK(head_min > tail_max);
            CHECK(compute_sir(set, ht.head, ht.tail) >= 1.0);
        }
    }
    SUBCASE("invalid fraction") {
        GraphSet set = test::set_with_sizes({4, 3, 2, 1});
        CHECK_THROWS_AS(head_tail_split(set, 0.0), ArgumentError);
        CHECK_THROWS_AS(head_tail_split(set, 1.0), ArgumentError);
    }
}

TEST_CASE("size-imbalance ratio") {
    SUBCASE("worked example") {
        GraphSet set = test::set_with_sizes({8, 4, 2, 2, 1});
        assign_head_tail(set, 0.2);
        CHECK(set.head_ids == std::vector<std::size_t>{0});
        CHECK(compute_sir(set) == doctest::Approx(8.0 / 2.25).epsilon(1e-12));
    }
    SUBCASE("equal sizes") {
        GraphSet set = test::set_with_sizes({6, 6, 6, 6, 6});
        assign_head_tail(set, 0.2);
        CHECK(compute_sir(set) == 1.0);
    }
    SUBCASE("head mean 100, tail mean 10") {
        GraphSet set = test::set_with_sizes({100, 100, 5, 15, 10, 10});
        std::vector<std::size_t> head{0, 1}, tail{2, 3, 4, 5};
        CHECK(compute_sir(set, head, tail) == doctest::Approx(10.0));
    }
    SUBCASE("empty partition") {
        GraphSet set = test::set_with_sizes({3, 2});
        std::vector<std::size_t> head{0, 1}, tail;
        CHECK_THROWS_AS(compute_sir(set, head, tail), ArgumentError);
    }
}

TEST_CASE("stratified split") {
    SUBCASE("exact divisibility") {
        GraphSet set = test::set_with_sizes(std::vector<std::size_t>(100, 3));
        Splits s = stratified_split(set, {6, 2, 2}, 0);
        CHECK(s.train.size() == 60);
        CHECK(s.val.size() == 20);
        CHECK(s.test.size() == 20);
        for (const auto* part : {&s.train, &s.val, &s.test}) {
            std::size_t zeros = 0;
            for (auto i : *part) zeros += set.graphs[i].label == 0;
            CHECK(zeros * 2 == part->size());
        }
        CHECK(stratified_split(set, {6, 2, 2}, 0) == s);
        CHECK(stratified_split(set, {6, 2, 2}, 1) != s);
    }
    SUBCASE("101 graphs") {
        GraphSet set = test::set_with_sizes(std::vector<std::size_t>(101, 3));
        Splits s = stratified_split(set, {6, 2, 2}, 5);
        std::vector<std::size_t> sizes{s.train.size(), s.val.size(), s.test.size()};
        CHECK(sizes[0] + sizes[1] + sizes[2] == 101);
        bool ok = sizes == std::vector<std::size_t>{61, 20, 20} || sizes == std::vector<std::size_t>{60, 21, 20} ||
                  sizes == std::vector<std::size_t>{60, 20, 21};
        CHECK(ok);
        // per-class deviation from the ideal share is below one instance
        const double ratio[3] = {0.6, 0.2, 0.2};
        const std::vector<std::size_t>* parts[3] = {&s.train, &s.val, &s.test};
        for (std::size_t c = 0; c < 2; ++c) {
            std::size_t n_c = 0;
            for (const auto& g : set.graphs) n_c += g.label == c;
            for (int p = 0; p < 3; ++p) {
                std::size_t cnt = 0;
                for (auto i : *parts[p]) cnt += set.graphs[i].label == c;
                CHECK(std::abs(double(cnt) - ratio[p] * double(n_c)) < 1.0);
            }
        }
        // disjoint cover
        std::vector<std::size_t> all = s.train;
        all.insert(all.end(), s.val.begin(), s.val.end());
        all.insert(all.end(), s.test.begin(), s.test.end());
        std::sort(all.begin(), all.end());
        for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i] == i);
    }
    SUBCASE("tiny class") {
        GraphSet set = test::set_with_sizes({3, 3, 3, 3, 3}, 3);
        set.graphs[2].label = 0;  // class 2 now has a single graph
        set.graphs[4].label = 0;
        CHECK_THROWS_AS(stratified_split(set, {6, 2, 2}, 0), SplitError);
    }
}

TEST_CASE("synthetic power-law sets") {
    SUBCASE("size distribution follows the truncated power law") {
        SynthConfig cfg;
        cfg.graphs = 500;
        cfg.exponent = 2.0;
        cfg.min_size = 5;
        cfg.max_size = 200;
        cfg.seed = 0;
        GraphSet set = synth_powerlaw_set(cfg);
        const std::vector<std::size_t> edges{5, 10, 20, 40, 80, 160, 201};
        std::vector<double> observed(edges.size() - 1, 0.0), expected(edges.size() - 1, 0.0);
        double z = 0.0;
        for (std::size_t n = 5; n <= 200; ++n) z += std::pow(double(n), -2.0);
        for (std::size_t b = 0; b + 1 < edges.size(); ++b)
            for (std::size_t n = edges[b]; n < edges[b + 1]; ++n) expected[b] += 500.0 * std::pow(double(n), -2.0) / z;
        for (std::size_t s : set.sizes())
            for (std::size_t b = 0; b + 1 < edges.size(); ++b)
                if (s >= edges[b] && s < edges[b + 1]) observed[b] += 1.0;
        for (std::size_t b = 0; b + 1 < observed.size(); ++b) CHECK(observed[b] > observed[b + 1]);
        double chi2 = 0.0;
        for (std::size_t b = 0; b < observed.size(); ++b)
            chi2 += (observed[b] - expected[b]) * (observed[b] - expected[b]) / expected[b];
        CHECK(chi2 < 20.52);  // 0.999 quantile, 5 degrees of freedom
    }
    SUBCASE("pmf sums to one") {
        auto pmf = truncated_powerlaw_pmf(2.0, 5, 200);
        double total = 0.0;
        for (double p : pmf) total += p;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(pmf.size() == 196);
    }
    SUBCASE("degenerate range") {
        SynthConfig cfg;
        cfg.graphs = 50;
        cfg.min_size = 5;
        cfg.max_size = 5;
        cfg.motif = MotifRule::Trivial;
        GraphSet set = synth_powerlaw_set(cfg);
        for (auto s : set.sizes()) CHECK(s == 5);
        assign_head_tail(set, 0.2);
        CHECK(compute_sir(set) == 1.0);
    }
    SUBCASE("deterministic per seed") {
        SynthConfig cfg;
        cfg.graphs = 80;
        cfg.seed = 9;
        GraphSet a = synth_powerlaw_set(cfg);
        GraphSet b = synth_powerlaw_set(cfg);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.graphs[i] == b.graphs[i]);
        auto da = test::temp_dir("synth-a"), db = test::temp_dir("synth-b");
        write_tu_dataset(a, da, "S");
        write_tu_dataset(b, db, "S");
        CHECK(test::read_file(da / "S_A.txt") == test::read_file(db / "S_A.txt"));
        CHECK(test::read_file(da / "S_node_attributes.txt") == test::read_file(db / "S_node_attributes.txt"));
        cfg.seed = 10;
        GraphSet c = synth_powerlaw_set(cfg);
        bool differs = false;
        for (std::size_t i = 0; i < a.size(); ++i) differs |= !(a.graphs[i] == c.graphs[i]);
        CHECK(differs);
    }
    SUBCASE("balanced labels and valid structure") {
        SynthConfig cfg;
        cfg.graphs = 101;
        cfg.classes = 4;
        cfg.min_size = 6;
        GraphSet set = synth_powerlaw_set(cfg);
        validate(set);
        std::map<std::size_t, std::size_t> counts;
        for (auto l : set.labels()) ++counts[l];
        CHECK(counts.size() == 4);
        for (auto [c, n] : counts) CHECK((n == 25 || n == 26));
    }
    SUBCASE("infeasible configuration") {
        SynthConfig cfg;
        cfg.min_size = 2;
        CHECK_THROWS_AS(synth_powerlaw_set(cfg), ArgumentError);
    }
}

TEST_CASE("dataset statistics") {
    GraphSet set = test::set_with_sizes({4, 2});
    set.graphs[0].edges = {{0, 1}, {1, 2}, {2, 3}};
    set.graphs[1].edges = {{0, 1}};
    DatasetStats s = describe(set);
    CHECK(s.graphs == 2);
    CHECK(s.avg_nodes == 3.0);
    CHECK(s.avg_edges == 2.0);
    CHECK(s.min_nodes == 2);
    CHECK(s.max_nodes == 4);
    CHECK(s.class_counts == std::vector<std::size_t>{1, 1});
}
