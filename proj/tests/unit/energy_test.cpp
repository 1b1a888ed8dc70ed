#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "simba/energy.hpp"
#include "simba/errors.hpp"
#include "simba/gradcheck.hpp"
#include "support.hpp"

using namespace simba;

namespace {

G2GAbstraction pair_abstraction() { return build_knn_abstraction(Tensor::from_rows({{1, 0}, {0, 1}}), 1); }

double brute_logsumexp(std::span<const double> v) {
    double m = *std::max_element(v.begin(), v.end());
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

}  // namespace

TEST_CASE("classifier") {
    Rng rng(1);
    ParameterStore store;
    Classifier cls(32, 3, store, rng);
    SUBCASE("zero weights give a uniform distribution") {
        cls.weight().value.fill(0.0);
        cls.bias().value.fill(0.0);
        Tensor logits = cls.forward(test::random_tensor(4, 32, rng));
        CHECK(logits == Tensor(4, 3, 0.0));
        Tensor p = predictive_distribution(logits);
        for (double x : p.data()) CHECK(x == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    }
    SUBCASE("one-hot row selects a coordinate") {
        ParameterStore s2;
        Classifier small(3, 3, s2, rng);
        small.weight().value = Tensor::identity(3);
        small.bias().value.fill(0.0);
        Tensor x = Tensor::from_rows({{0, 1, 0}});
        Tensor logits = small.forward(x);
        CHECK(logits(0, 1) == 1.0);
        CHECK(logits(0, 0) == 0.0);
    }
    SUBCASE("matches a direct affine evaluation") {
        Tensor x = test::random_tensor(4, 32, rng);
        Tensor logits = cls.forward(x);
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t c = 0; c < 3; ++c) {
                double v = cls.bias().value[c];
                for (std::size_t k = 0; k < 32; ++k) v += x(i, k) * cls.weight().value(k, c);
                CHECK(std::abs(logits(i, c) - v) < 1e-12);
            }
        Tape tape;
        CHECK(max_abs_diff(cls.forward(tape, tape.constant(x), true).value(), logits) < 1e-12);
    }
    SUBCASE("dimension check") { CHECK_THROWS_AS(cls.forward(Tensor(2, 5)), DimensionError); }
}

TEST_CASE("free energy") {
    auto e = free_energy(Tensor::from_rows({{0, 0}, {3.5, 3.5}, {2, 1}}));
    CHECK(e[0] == doctest::Approx(-std::log(2.0)).epsilon(1e-15));
    CHECK(e[1] == doctest::Approx(-3.5 - std::log(2.0)).epsilon(1e-15));
    CHECK(e[2] == doctest::Approx(-std::log(std::exp(2.0) + std::exp(1.0))).epsilon(1e-14));
    CHECK(e[2] == doctest::Approx(-2.31326).epsilon(1e-5));
    auto big = free_energy(Tensor::from_rows({{1000, 1000}}));
    CHECK(std::isfinite(big[0]));
}

TEST_CASE("energy propagation") {
    auto a = pair_abstraction();
    std::vector<double> e0{0, 2};
    auto e1 = propagate_energy(e0, a, 0.5, 1);
    CHECK(e1[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(e1[1] == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(propagate_energy(e0, a, 1.0, 5) == e0);
    CHECK(propagate_energy(e0, a, 0.3, 0) == e0);
    CHECK_THROWS_AS(propagate_energy(e0, a, 0.0, 1), ArgumentError);
    CHECK_THROWS_AS(propagate_energy(std::vector<double>{1, 2, 3}, a, 0.5, 1), DimensionError);

    Rng rng(2);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t n = 2 + rng.index(29);
        std::size_t k = 1 + rng.index(std::min<std::size_t>(4, n - 1));
        auto abs = build_knn_abstraction(cosine_similarity_matrix(test::random_tensor(n, 4, rng)), k);
        std::vector<double> e(n);
        for (auto& x : e) x = rng.uniform(-10, 10);
        double lambda = rng.uniform(0.01, 1.0);
        auto et = propagate_energy(e, abs, lambda, rng.index(5));
        auto [lo, hi] = std::minmax_element(e.begin(), e.end());
        for (double x : et) {
            CHECK(x >= *lo - 1e-12);
            CHECK(x <= *hi + 1e-12);
        }
        // one step is exactly lambda e + (1 - lambda) P e
        auto one = propagate_energy(e, abs, lambda, 1);
        Tensor pe = matmul(abs.norm_operator(), Tensor::column_vector(e));
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(one[i] - (lambda * e[i] + (1 - lambda) * pe[i])) < 1e-12);
    }
}

TEST_CASE("energy ranks") {
    CHECK(rank_energies(std::vector<double>{3, 1, 2}) == std::vector<std::size_t>{2, 0, 1});
    CHECK(rank_energies(std::vector<double>{5, 5, 5, 5}) == std::vector<std::size_t>{0, 1, 2, 3});
    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> e(1 + rng.index(30));
        for (auto& x : e) x = double(rng.index(6));  // plenty of ties
        std::vector<std::size_t> order(e.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return e[a] < e[b]; });
        std::vector<std::size_t> expected(e.size());
        for (std::size_t pos = 0; pos < order.size(); ++pos) expected[order[pos]] = pos;
        CHECK(rank_energies(e) == expected);
    }
}

TEST_CASE("cosine-annealed weights") {
    std::vector<std::size_t> ranks(100);
    std::iota(ranks.begin(), ranks.end(), 0);
    auto w = cosine_anneal_weights(ranks, 100, 0.5, 0.75);
    CHECK(w[0] == 0.75);
    CHECK(w[50] == doctest::Approx(0.625).epsilon(1e-15));
    CHECK(w[99] == doctest::Approx(0.5 + 0.125 * (1 + std::cos(0.99 * std::numbers::pi))).epsilon(1e-14));
    CHECK(w[99] == doctest::Approx(0.50006).epsilon(1e-5));
    for (std::size_t i = 0; i + 1 < w.size(); ++i) CHECK(w[i] >= w[i + 1]);
    for (double x : w) {
        CHECK(x >= 0.5);
        CHECK(x <= 0.75);
    }
}

TEST_CASE("weighted loss") {
    SUBCASE("uniform logits") {
        Tape tape;
        Var l = weighted_nll_loss(tape.constant(Tensor(7, 2, 0.0)), std::vector<std::size_t>(7, 1),
                                  std::vector<double>(7, 1.0));
        CHECK(l.value()[0] == doctest::Approx(7 * std::log(2.0)).epsilon(1e-15));
    }
    SUBCASE("saturated margin") {
        Tape tape;
        Var l = weighted_nll_loss(tape.constant(Tensor::from_rows({{20, 0}})), std::vector<std::size_t>{0},
                                  std::vector<double>{1.0});
        CHECK(l.value()[0] < 1e-8);
    }
    SUBCASE("brute force") {
        Rng rng(4);
        for (int trial = 0; trial < 20; ++trial) {
            Tensor logits = test::random_tensor(5, 2, rng, -3, 3);
            std::vector<std::size_t> y(5);
            std::vector<double> d(5);
            for (std::size_t i = 0; i < 5; ++i) {
                y[i] = rng.index(2);
                d[i] = rng.uniform(0.5, 0.75);
            }
            double expected = 0.0, unweighted = 0.0;
            for (std::size_t i = 0; i < 5; ++i) {
                double term = brute_logsumexp(logits.row(i)) - logits(i, y[i]);
                expected += d[i] * term;
                double p = std::exp(logits(i, y[i])) / (std::exp(logits(i, 0)) + std::exp(logits(i, 1)));
                unweighted -= std::log(p);
            }
            Tape tape;
            CHECK(std::abs(weighted_nll_loss(tape.constant(logits), y, d).value()[0] - expected) < 1e-12);
            CHECK(std::abs(weighted_nll_loss(tape.constant(logits), y, std::vector<double>(5, 1.0)).value()[0] -
                           unweighted) < 1e-12);
        }
    }
    SUBCASE("gradient through the classifier") {
        Rng rng(5);
        ParameterStore store;
        Classifier cls(6, 3, store, rng);
        Tensor x = test::random_tensor(8, 6, rng);
        std::vector<std::size_t> y{0, 1, 2, 2, 1, 0, 0, 1};
        std::vector<double> d{0.5, 0.6, 0.75, 0.7, 0.55, 0.5, 0.65, 0.6};
        auto params = store.trainable();
        double err = finite_diff_check(params, [&](Tape& tape) {
            return weighted_nll_loss(cls.forward(tape, tape.constant(x), true), y, d);
        });
        CHECK(err < 1e-4);
    }
    SUBCASE("argument checks") {
        Tape tape;
        Var logits = tape.constant(Tensor(2, 2));
        CHECK_THROWS_AS(weighted_nll_loss(logits, std::vector<std::size_t>{0}, std::vector<double>{1, 1}),
                        DimensionError);
        CHECK_THROWS_AS(weighted_nll_loss(logits, std::vector<std::size_t>{0, 5}, std::vector<double>{1, 1}),
                        ArgumentError);
    }
}

TEST_CASE("energy state") {
    Rng rng(6);
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t n = 3 + rng.index(25);
        auto abs = build_knn_abstraction(cosine_similarity_matrix(test::random_tensor(n, 4, rng)), 2);
        Tensor logits = test::random_tensor(n, 3, rng, -4, 4);
        EnergyState s = compute_energy_state(logits, abs, RewConfig{});
        CHECK(s.e0 == free_energy(logits));
        CHECK(s.et == propagate_energy(s.e0, abs, 0.5, 2));
        CHECK(s.ranks == rank_energies(s.et));
        std::vector<std::size_t> sorted = s.ranks;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < n; ++i) CHECK(sorted[i] == i);
        std::size_t lowest = std::min_element(s.et.begin(), s.et.end()) - s.et.begin();
        std::size_t heaviest = std::max_element(s.weights.begin(), s.weights.end()) - s.weights.begin();
        CHECK(heaviest == lowest);
        CHECK(s.weights[lowest] == 0.75);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (s.ranks[i] < s.ranks[j]) CHECK(s.weights[i] >= s.weights[j]);
    }

    std::ostringstream out;
    EnergyState s = compute_energy_state(Tensor::from_rows({{0, 1}, {2, 0}}), pair_abstraction(), RewConfig{});
    std::vector<std::size_t> ids{4, 9};
    write_energy_trace(out, 0, ids, s);
    write_energy_trace(out, 1, ids, s);
    std::string text = out.str();
    CHECK(text.rfind("epoch,graph,e0,et,rank,delta\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 5);
    CHECK(text.find("\n1,9,") != std::string::npos);
}

TEST_CASE("re-weighting config") {
    RewConfig c;
    CHECK(c.lambda == 0.5);
    CHECK(c.steps == 2);
    CHECK(c.eps_min == 0.5);
    CHECK(c.eps_max == 0.75);
    validate(c);
    c.lambda = 1.5;
    CHECK_THROWS_AS(validate(c), ArgumentError);
    c = RewConfig{};
    c.eps_min = 0.9;
    CHECK_THROWS_AS(validate(c), ArgumentError);
}
