#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <hdforms/complex.hpp>
#include <hdforms/io.hpp>

using namespace hdforms;

TEST_CASE("path generator: vertices, edges, metric") {
    auto X = generate_path(8);
    CHECK(X.num_vertices() == 8);
    CHECK(X.cells[1].size() == 7);
    CHECK(X.dimension == 1);
    CHECK(X.dist(0, 7) == doctest::Approx(7.0));
    CHECK(X.dist(3, 3) == 0.0);
}

TEST_CASE("P2 basics: distance, balls, volumes") {
    auto X = generate_path(2);
    CHECK(X.dist(0, 1) == doctest::Approx(1.0));
    CHECK(X.ball(0, 0.5) == std::vector<int>{0});
    CHECK(X.volume(0, 0.5) == doctest::Approx(1.0));
    CHECK(X.ball(0, 1.5) == std::vector<int>{0, 1});
    CHECK(X.volume(0, 1.5) == doctest::Approx(2.0));
    CHECK_THROWS(X.ball(0, 0.0));
    CHECK_THROWS(X.ball(5, 1.0));
}

TEST_CASE("C4: shortest-path distances and ball volume") {
    auto X = generate_cycle(4);
    CHECK(X.dist(0, 2) == doctest::Approx(2.0));
    CHECK(X.dist(0, 1) == doctest::Approx(1.0));
    // vertices within distance < 1.5 of v0: v0, v1, v3
    CHECK(X.volume(0, 1.5) == doctest::Approx(3.0));
}

TEST_CASE("load_complex: JSON round trip and validation errors") {
    auto X = generate_cycle(4);
    json j = complex_to_json(X);
    auto Y = complex_from_json(j);
    CHECK(Y.num_vertices() == 4);
    CHECK(Y.dist(0, 2) == doctest::Approx(2.0));
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) CHECK(Y.dist(a, b) == doctest::Approx(X.dist(a, b)));

    SUBCASE("non-positive measure rejected") {
        json bad = j;
        bad["vertices"][0]["measure"] = 0.0;
        CHECK_THROWS_WITH_AS(static_cast<void>(complex_from_json(bad)),
                             doctest::Contains("non-positive measure"), std::invalid_argument);
    }
    SUBCASE("missing required keys rejected") {
        json bad;
        bad["vertices"] = json::array();
        CHECK_THROWS_AS(static_cast<void>(complex_from_json(bad)), std::invalid_argument);
    }
    SUBCASE("disconnected complex rejected") {
        json bad;
        bad["dimension"] = 0;
        bad["vertices"] = {{{"id", "a"}, {"measure", 1.0}}, {{"id", "b"}, {"measure", 1.0}}};
        CHECK_THROWS_WITH_AS(static_cast<void>(complex_from_json(bad)),
                             doctest::Contains("disconnected"), std::invalid_argument);
    }
    SUBCASE("explicit non-metric distances rejected") {
        json bad = j;
        std::vector<std::vector<double>> dm(4, std::vector<double>(4, 0.0));
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) dm[a][b] = X.dist(a, b);
        dm[0][2] = 9.0;   // breaks symmetry and the triangle inequality
        bad["distances"] = dm;
        CHECK_THROWS_AS(static_cast<void>(complex_from_json(bad)), std::invalid_argument);
    }
}

TEST_CASE("metric axioms hold on the generator catalog") {
    std::vector<MetricMeasureComplex> cat;
    cat.push_back(generate_path(8));
    cat.push_back(generate_cycle(16));
    cat.push_back(generate_torus_grid(4, 4));
    cat.push_back(generate_sphere_triangulation(1));
    cat.push_back(generate_dumbbell(3, 4));
    for (const auto& X : cat) {
        CHECK_NOTHROW(X.validate());
        // V(x,r) nondecreasing in r
        for (int x = 0; x < X.num_vertices(); ++x) {
            double prev = 0.0;
            for (double r : {0.5, 1.0, 2.0, 4.0, 8.0}) {
                double v = X.volume(x, r);
                CHECK(v >= prev);
                prev = v;
            }
        }
    }
}

TEST_CASE("dumbbell: connected with long diameter") {
    auto X = generate_dumbbell(5, 6);
    CHECK(X.num_vertices() == 5 * 5 * 2 + 5);
    CHECK(X.diameter() >= 6.0);
    CHECK_NOTHROW(X.validate());
}

TEST_CASE("doubling certificate: P2, singleton, torus") {
    SUBCASE("P2: kappa <= 1 + tolerance") {
        auto X = generate_path(2);
        auto c = estimate_doubling(X, default_radius_grid(X));
        CHECK(c.kappa <= 1.0 + 1e-9);
        CHECK(c.C_D <= 2.0 + 1e-12);
        CHECK(c.beta == beta_from_kappa(c.kappa));
        for (const auto& s : c.samples)
            CHECK(X.volume(s.center, 2 * s.radius) <= c.C_D * X.volume(s.center, s.radius) + 1e-12);
    }
    SUBCASE("single vertex: kappa = 0, C_D = 1") {
        auto X = generate_path(1);
        auto c = estimate_doubling(X, {0.5, 1.0, 2.0});
        CHECK(c.kappa == doctest::Approx(0.0));
        CHECK(c.C_D == doctest::Approx(1.0));
        CHECK(c.beta == 1);
    }
    SUBCASE("torus 16x16: kappa in [1.5, 2.5]") {
        auto X = generate_torus_grid(16, 16);
        auto c = estimate_doubling(X, default_radius_grid(X));
        CHECK(c.kappa >= 1.5);
        CHECK(c.kappa <= 2.5);
    }
    SUBCASE("empty radius grid") {
        auto X = generate_path(2);
        CHECK_THROWS(static_cast<void>(estimate_doubling(X, {})));
    }
}

TEST_CASE("beta is the smallest integer strictly larger than kappa/2") {
    CHECK(beta_from_kappa(0.0) == 1);
    CHECK(beta_from_kappa(1.0) == 1);
    CHECK(beta_from_kappa(2.0) == 2);
    CHECK(beta_from_kappa(2.3) == 2);
    CHECK(beta_from_kappa(4.0) == 3);
    CHECK(beta_from_kappa(3.999) == 2);
}

TEST_CASE("doubling certificate reproducible bit-for-bit") {
    auto X = generate_cycle(12);
    auto g = default_radius_grid(X);
    auto c1 = estimate_doubling(X, g);
    auto c2 = estimate_doubling(X, g);
    CHECK(c1.kappa == c2.kappa);
    CHECK(c1.C_D == c2.C_D);
    REQUIRE(c1.samples.size() == c2.samples.size());
    for (size_t i = 0; i < c1.samples.size(); ++i)
        CHECK(c1.samples[i].ratio == c2.samples[i].ratio);
}

TEST_CASE("whitney decomposition: cover, containment, overlap") {
    auto X = generate_path(8);

    SUBCASE("singleton O") {
        auto balls = whitney_decompose(X, {3});
        REQUIRE(balls.size() == 1);
        CHECK(balls[0].center == 3);
        CHECK(balls[0].radius <= 0.5 + 1e-12);   // <= rho(v3, O^c)/2
    }
    SUBCASE("interval O = {v2,v3,v4}") {
        std::vector<int> O = {2, 3, 4};
        auto balls = whitney_decompose(X, O);
        std::vector<char> in_O(8, 0);
        for (int v : O) in_O[v] = 1;
        std::vector<char> covered(8, 0);
        for (const auto& b : balls) {
            // 2B inside O
            for (int y = 0; y < 8; ++y)
                if (X.dist(b.center, y) < 2 * b.radius) CHECK(in_O[y]);
            // 4B meets the complement
            bool touches = false;
            for (int y = 0; y < 8; ++y)
                if (!in_O[y] && X.dist(b.center, y) < 4 * b.radius) touches = true;
            CHECK(touches);
            for (int y : O)
                if (X.dist(b.center, y) < b.radius) covered[y] = 1;
        }
        for (int v : O) CHECK(covered[v]);
    }
    SUBCASE("overlap bounded on a larger open set") {
        auto Y = generate_cycle(32);
        std::vector<int> O;
        for (int v = 0; v < 20; ++v) O.push_back(v);
        auto balls = whitney_decompose(Y, O);
        std::vector<int> count(32, 0);
        for (const auto& b : balls)
            for (int y = 0; y < 32; ++y)
                if (Y.dist(b.center, y) < b.radius) count[y]++;
        for (int v : O) CHECK(count[v] >= 1);
        for (int v = 0; v < 32; ++v) CHECK(count[v] <= 3);
    }
    SUBCASE("preconditions") {
        CHECK_THROWS(static_cast<void>(whitney_decompose(X, {})));
        CHECK_THROWS(static_cast<void>(whitney_decompose(X, {0, 1, 2, 3, 4, 5, 6, 7})));
    }
}

TEST_CASE("generator preconditions") {
    CHECK_THROWS(static_cast<void>(generate_path(0)));
    CHECK_THROWS(static_cast<void>(generate_cycle(2)));
    CHECK_THROWS(static_cast<void>(generate_torus_grid(2, 4)));
    CHECK_THROWS(static_cast<void>(generate_complex("möbius", {4}, 0)));
    CHECK_THROWS(static_cast<void>(generate_complex("dumbbell", {5}, 0)));
}
