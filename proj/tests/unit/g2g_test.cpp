#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "simba/errors.hpp"
#include "simba/g2g.hpp"
#include "simba/log.hpp"
#include "support.hpp"

using namespace simba;

namespace {

using EdgeSet = std::set<std::pair<std::size_t, std::size_t>>;

// Brute-force top-k: sort the other rows by (similarity desc, index asc).
EdgeSet oracle_knn(const Tensor& s, std::size_t k) {
    const std::size_t n = s.rows();
    EdgeSet edges;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::size_t> others;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) others.push_back(j);
        std::sort(others.begin(), others.end(), [&](std::size_t a, std::size_t b) {
            if (s(i, a) != s(i, b)) return s(i, a) > s(i, b);
            return a < b;
        });
        for (std::size_t t = 0; t < k; ++t) {
            edges.insert({i, others[t]});
            edges.insert({others[t], i});
        }
        edges.insert({i, i});
    }
    return edges;
}

EdgeSet edges_of(const G2GAbstraction& a) {
    EdgeSet out;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j : a.neighbors(i)) out.insert({i, j});
    return out;
}

// Embeddings drawn from a small grid so that similarity ties happen.
Tensor tie_prone(std::size_t n, std::size_t d, Rng& rng) {
    Tensor t(n, d);
    for (auto& x : t.data()) x = double(rng.index(3)) - 1.0;
    for (std::size_t r = 0; r < n; ++r) t(r, rng.index(d)) = 1.0;
    return t;
}

}  // namespace

TEST_CASE("cosine similarity") {
    Tensor e = Tensor::from_rows({{1, 1}, {1, 0}, {0, 3}, {2, 2}});
    Tensor s = cosine_similarity_matrix(e);
    CHECK(s(0, 3) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(s(1, 2) == 0.0);
    CHECK(s(0, 1) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK(s(1, 0) == s(0, 1));

    std::vector<std::string> warnings;
    auto prev = set_warning_sink([&](const std::string& m) { warnings.push_back(m); });
    Tensor z = cosine_similarity_matrix(Tensor::from_rows({{0, 0}, {1, 0}}));
    set_warning_sink(prev);
    CHECK(z(0, 0) == 1.0);
    CHECK(z(0, 1) == 0.0);
    CHECK(z.all_finite());
    CHECK(!warnings.empty());
}

TEST_CASE("kNN examples") {
    SUBCASE("tie broken toward the lower index") {
        Tensor e = Tensor::from_rows({{1, 0}, {1, 0}, {0, 1}});
        auto a = build_knn_abstraction(cosine_similarity_matrix(e), 1);
        CHECK(a.neighbors(0) == std::vector<std::size_t>{0, 1, 2});
        CHECK(a.neighbors(1) == std::vector<std::size_t>{0, 1});
        CHECK(a.neighbors(2) == std::vector<std::size_t>{0, 2});
        for (std::size_t i = 0; i < 3; ++i) CHECK(a.degree(i) >= 2);
    }
    SUBCASE("two graphs") {
        auto a = build_knn_abstraction(cosine_similarity_matrix(Tensor::from_rows({{1, 2}, {3, -1}})), 1);
        CHECK(a.norm_operator() == Tensor(2, 2, 0.5));
    }
    SUBCASE("k = N - 1 is complete") {
        Rng rng(1);
        auto a = build_knn_abstraction(cosine_similarity_matrix(test::random_tensor(6, 3, rng)), 5);
        CHECK(a.adjacency() == Tensor(6, 6, 1.0));
    }
    SUBCASE("invalid k") {
        Tensor s = Tensor::identity(3);
        CHECK_THROWS_AS(build_knn_abstraction(s, 0), ArgumentError);
        CHECK_THROWS_AS(build_knn_abstraction(s, 3), ArgumentError);
        CHECK_THROWS_AS(build_knn_abstraction(Tensor(2, 3), 1), DimensionError);
    }
    SUBCASE("member ids are kept") {
        auto a = build_knn_abstraction(Tensor::identity(3), 1, {7, 3, 9});
        CHECK(a.member_ids() == std::vector<std::size_t>{7, 3, 9});
    }
}

TEST_CASE("kNN matches the brute-force selector") {
    Rng rng(2);
    for (int trial = 0; trial < 300; ++trial) {
        std::size_t n = 2 + rng.index(19);
        std::size_t k = 1 + rng.index(std::min<std::size_t>(4, n - 1));
        Tensor e = trial % 2 ? tie_prone(n, 3, rng) : test::random_tensor(n, 4, rng);
        Tensor s = cosine_similarity_matrix(e);
        CHECK(edges_of(build_knn_abstraction(s, k)) == oracle_knn(s, k));
    }
}

TEST_CASE("propagation operator") {
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t n = 2 + rng.index(29);
        std::size_t k = 1 + rng.index(std::min<std::size_t>(4, n - 1));
        auto a = build_knn_abstraction(cosine_similarity_matrix(test::random_tensor(n, 5, rng)), k);
        Tensor b = a.adjacency();
        Tensor p = a.norm_operator();
        CHECK(b == transpose(b));
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(b(i, i) == 1.0);
            double sum = 0.0;
            for (std::size_t j = 0; j < n; ++j) sum += p(i, j);
            CHECK(std::abs(sum - 1.0) < 1e-12);
        }

        Tensor h = test::random_tensor(n, 3, rng, -5, 5);
        Tensor out = g2g_propagate(a, h, 1 + rng.index(3));
        for (std::size_t c = 0; c < 3; ++c) {
            double lo = 1e300, hi = -1e300;
            for (std::size_t r = 0; r < n; ++r) {
                lo = std::min(lo, h(r, c));
                hi = std::max(hi, h(r, c));
            }
            for (std::size_t r = 0; r < n; ++r) {
                CHECK(out(r, c) >= lo - 1e-12);
                CHECK(out(r, c) <= hi + 1e-12);
            }
        }
        CHECK(max_abs_diff(g2g_propagate(a, h, 1), matmul(p, h)) < 1e-12);
        CHECK(g2g_propagate(a, h, 0) == h);

        Tensor c(n, 3);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t j = 0; j < 3; ++j) c(r, j) = double(j) - 0.25;
        CHECK(max_abs_diff(g2g_propagate(a, c, 3), c) < 1e-14);
    }
}

TEST_CASE("propagation examples") {
    auto a = build_knn_abstraction(Tensor::from_rows({{1, 0}, {0, 1}}), 1);
    CHECK(g2g_propagate(a, Tensor::identity(2), 1) == Tensor(2, 2, 0.5));
    CHECK_THROWS_AS(g2g_propagate(a, Tensor(3, 2), 1), DimensionError);

    Parameter h("h", Tensor::from_rows({{1, 2}, {3, 5}}));
    Tape tape;
    Var out = g2g_propagate(a, tape.parameter(h), 2);
    tape.backward(ops::reduce_sum(out));
    CHECK(h.grad == Tensor(2, 2, 1.0));  // P is doubly stochastic here
}

TEST_CASE("smoothing over the abstraction") {
    // Sum over neighbour pairs of |H_i - H_j|^2 before and after one step.
    auto dirichlet = [](const G2GAbstraction& a, const Tensor& h) {
        double total = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j : a.neighbors(i))
                for (std::size_t c = 0; c < h.cols(); ++c) total += (h(i, c) - h(j, c)) * (h(i, c) - h(j, c));
        return total;
    };
    Rng rng(4);
    std::size_t violations = 0, trials = 500;
    for (std::size_t t = 0; t < trials; ++t) {
        std::size_t n = 2 + rng.index(29);
        std::size_t k = 1 + rng.index(std::min<std::size_t>(4, n - 1));
        Tensor h = test::random_tensor(n, 4, rng);
        auto a = build_knn_abstraction(cosine_similarity_matrix(h), k);
        if (dirichlet(a, g2g_propagate(a, h, 1)) > dirichlet(a, h) * (1 + 1e-12)) ++violations;
    }
    CHECK(violations == 0);
}

TEST_CASE("inductive extension") {
    Rng rng(5);
    Tensor train = test::random_tensor(8, 4, rng);
    Tensor eval = test::random_tensor(3, 4, rng);
    std::vector<std::size_t> train_ids{10, 11, 12, 13, 14, 15, 16, 17};
    auto base = build_knn_abstraction(cosine_similarity_matrix(train), 2, train_ids);
    auto ext = extend_inductive(base, train, eval, 2, {20, 21, 22});
    REQUIRE(ext.size() == 11);
    for (std::size_t i = 0; i < 8; ++i) CHECK(ext.neighbors(i) == base.neighbors(i));
    CHECK(ext.member_ids().back() == 22);

    for (std::size_t e = 0; e < 3; ++e) {
        const auto& nb = ext.neighbors(8 + e);
        CHECK(nb.size() == 3);
        CHECK(std::find(nb.begin(), nb.end(), 8 + e) != nb.end());
        // oracle: top-2 training rows by cosine similarity
        std::vector<std::pair<double, std::size_t>> scored;
        for (std::size_t j = 0; j < 8; ++j) {
            double dot = 0, na = 0, nb2 = 0;
            for (std::size_t c = 0; c < 4; ++c) {
                dot += eval(e, c) * train(j, c);
                na += eval(e, c) * eval(e, c);
                nb2 += train(j, c) * train(j, c);
            }
            scored.push_back({-dot / std::sqrt(na * nb2), j});
        }
        std::sort(scored.begin(), scored.end());
        std::vector<std::size_t> expected{scored[0].second, scored[1].second, 8 + e};
        std::sort(expected.begin(), expected.end());
        CHECK(nb == expected);
    }

    // evaluated rows never influence training rows or each other
    Tensor h = test::random_tensor(11, 4, rng);
    Tensor out = g2g_propagate(ext, h, 2);
    Tensor h2 = h;
    for (std::size_t c = 0; c < 4; ++c) h2(9, c) += 10.0;
    Tensor out2 = g2g_propagate(ext, h2, 2);
    for (std::size_t r = 0; r < 11; ++r) {
        if (r == 9) continue;
        for (std::size_t c = 0; c < 4; ++c) CHECK(out(r, c) == out2(r, c));
    }

    CHECK_THROWS_AS(extend_inductive(base, train, eval, 9, {20, 21, 22}), ArgumentError);
    CHECK_THROWS_AS(extend_inductive(base, train, eval, 2, {20, 21}), DimensionError);
}

TEST_CASE("abstraction dump") {
    auto a = build_knn_abstraction(cosine_similarity_matrix(Tensor::from_rows({{1, 0}, {1, 1}, {0, 1}})), 1, {4, 5, 6});
    auto dir = test::temp_dir("dump");
    a.dump(dir / "g2g.txt");
    std::string text = test::read_file(dir / "g2g.txt");
    CHECK(text.find("4 5 ") == 0);
    std::size_t lines = std::count(text.begin(), text.end(), '\n');
    std::size_t expected = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j : a.neighbors(i)) expected += j > i;
    CHECK(lines == expected);
}
