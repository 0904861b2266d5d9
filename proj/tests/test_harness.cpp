#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>

#include <hdforms/hdforms.hpp>

using namespace hdforms;

namespace {

struct Setup {
    MetricMeasureComplex X;
    GradedSpace S;
    GradedOperator d, dstar;
    SpectralDecomposition spec;
    explicit Setup(MetricMeasureComplex x)
        : X(std::move(x)), S(X), d(assemble_exterior_derivative(S)),
          dstar(assemble_codifferential(S, d)), spec(decompose_dirac(S)) {}
};

struct TempFile {
    std::string path;
    explicit TempFile(std::string p) : path(std::move(p)) {}
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("battery generation: determinism, constraints, normalization") {
    Setup s(generate_cycle(8));

    auto b1 = generate_battery(s.spec, s.d, s.dstar, 3, 42, BatteryConstraint::range_D);
    auto b2 = generate_battery(s.spec, s.d, s.dstar, 3, 42, BatteryConstraint::range_D);
    REQUIRE(b1.size() == 3);
    for (size_t i = 0; i < b1.size(); ++i) {
        CHECK((b1[i].coeffs - b2[i].coeffs).norm() == 0.0);   // bitwise determinism
        CHECK(b1[i].norm() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(harmonic_part(s.spec, b1[i]).norm() <= 1e-10);
    }
    auto b3 = generate_battery(s.spec, s.d, s.dstar, 2, 43, BatteryConstraint::range_D);
    CHECK((b1[0].coeffs - b3[0].coeffs).norm() > 1e-6);   // different seed, different forms

    SUBCASE("range_d forms are exact, range_dstar coexact") {
        for (const auto& f : generate_battery(s.spec, s.d, s.dstar, 3, 1,
                                              BatteryConstraint::range_d)) {
            auto h = hodge_decompose(s.spec, s.d, s.dstar, f);
            CHECK(h.coexact.norm() <= 1e-10);
            CHECK(h.harmonic.norm() <= 1e-10);
        }
        for (const auto& f : generate_battery(s.spec, s.d, s.dstar, 3, 1,
                                              BatteryConstraint::range_dstar)) {
            auto h = hodge_decompose(s.spec, s.d, s.dstar, f);
            CHECK(h.exact.norm() <= 1e-10);
        }
    }
    SUBCASE("range_d on a tree's 1-forms spans all 1-forms") {
        Setup t(generate_path(5));
        // d0 maps 0-forms onto 1-forms on a tree: 4 independent directions
        auto battery = generate_battery(t.spec, t.d, t.dstar, 8, 3, BatteryConstraint::range_d);
        Eigen::MatrixXcd M(t.S.degree_size(1), battery.size());
        for (size_t i = 0; i < battery.size(); ++i) M.col(i) = battery[i].degree(1);
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
        int rank = 0;
        for (int i = 0; i < svd.singularValues().size(); ++i)
            if (svd.singularValues()(i) > 1e-10) rank++;
        CHECK(rank == 4);
    }
    SUBCASE("count precondition") {
        CHECK_THROWS(static_cast<void>(
            generate_battery(s.spec, s.d, s.dstar, 0, 1, BatteryConstraint::any)));
    }
    SUBCASE("constraint parser") {
        CHECK(parse_constraint("range_D") == BatteryConstraint::range_D);
        CHECK(parse_constraint("any") == BatteryConstraint::any);
        CHECK_THROWS(static_cast<void>(parse_constraint("harmonics")));
    }
}

TEST_CASE("regression store: freeze on first sight, band check afterwards") {
    TempFile tf("test_regressions.json");
    std::remove(tf.path.c_str());
    {
        RegressionStore store(tf.path);
        auto e = store.check("k1", 10.0, 0.2);
        CHECK(e.provenance == "measured");
        CHECK(e.within_band);
        store.save();
    }
    {
        RegressionStore store(tf.path);
        auto ok = store.check("k1", 11.0, 0.2);
        CHECK(ok.provenance == "frozen");
        CHECK(ok.value == doctest::Approx(10.0));
        CHECK(ok.within_band);
        auto bad = store.check("k1", 13.0, 0.2);
        CHECK(!bad.within_band);
    }
}

TEST_CASE("run_experiment: spectrum on P2, errors, determinism") {
    TempFile report("test_report.json");
    TempFile store("test_store.json");

    ExperimentConfig cfg;
    cfg.generator_kind = "path";
    cfg.generator_size = {2};
    cfg.experiments = {"spectrum"};
    cfg.output_path = report.path;
    cfg.regression_store = store.path;

    CHECK(run_experiment(cfg));
    json j = load_json_file(report.path);
    auto ev = j["spectrum"]["eigenvalues"].get<std::vector<double>>();
    REQUIRE(ev.size() == 3);
    CHECK(ev[0] == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-10));
    CHECK(ev[1] == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(ev[2] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));

    SUBCASE("empty experiment list rejected") {
        ExperimentConfig bad = cfg;
        bad.experiments = {};
        CHECK_THROWS_WITH_AS(static_cast<void>(run_experiment(bad)),
                             doctest::Contains("nothing to run"), std::invalid_argument);
    }
    SUBCASE("unknown experiment reported with context") {
        ExperimentConfig bad = cfg;
        bad.experiments = {"calderon", "warp"};
        CHECK_THROWS_WITH_AS(static_cast<void>(run_experiment(bad)),
                             doctest::Contains("experiment 'warp'"), std::runtime_error);
    }
    SUBCASE("verdicts deterministic across repeated runs") {
        ExperimentConfig c2 = cfg;
        c2.generator_kind = "cycle";
        c2.generator_size = {16};
        c2.experiments = {"calderon", "riesz"};
        CHECK(run_experiment(c2));
        json first = load_json_file(report.path);
        CHECK(run_experiment(c2));
        json second = load_json_file(report.path);
        CHECK(first["calderon"]["max_relative_error"] ==
              second["calderon"]["max_relative_error"]);
        CHECK(first["riesz"]["pass"] == second["riesz"]["pass"]);
        CHECK(second["pass"].get<bool>());
    }
}

TEST_CASE("run_experiment: regression-backed experiments freeze and re-check") {
    TempFile report("test_report2.json");
    TempFile store("test_store2.json");

    ExperimentConfig cfg;
    cfg.generator_kind = "cycle";
    cfg.generator_size = {8};
    cfg.experiments = {"hardy_norms"};
    cfg.p_values = {1.0, 2.0};
    cfg.points_per_decade = 10;
    cfg.battery_count = 3;
    cfg.output_path = report.path;
    cfg.regression_store = store.path;

    CHECK(run_experiment(cfg));
    json first = load_json_file(report.path);
    for (auto& [key, block] : first["hardy_norms"].items())
        CHECK(block["provenance"] == "measured");

    CHECK(run_experiment(cfg));
    json second = load_json_file(report.path);
    for (auto& [key, block] : second["hardy_norms"].items()) {
        CHECK(block["provenance"] == "frozen");
        CHECK(block["pass"].get<bool>());
    }
}

TEST_CASE("config and form/field JSON round trips") {
    json j = {{"generate", "cycle"}, {"size", {6}},      {"seed", 5},
              {"experiments", {"spectrum"}}, {"p", {1.0, 4.0}}, {"output", "x.json"}};
    auto cfg = config_from_json(j);
    CHECK(cfg.generator_kind == "cycle");
    CHECK(cfg.generator_size == std::vector<int>{6});
    CHECK(cfg.seed == 5u);
    CHECK(cfg.p_values == std::vector<double>{1.0, 4.0});

    Setup s(generate_cycle(6));
    auto battery = generate_battery(s.spec, s.d, s.dstar, 1, 9, BatteryConstraint::any);
    json fj = form_to_json(battery[0]);
    GradedForm back = form_from_json(s.S, fj);
    CHECK((back.coeffs - battery[0].coeffs).norm() <= 1e-15);

    TimeGrid grid = make_time_grid(0.5, 2.0, 6);
    SpaceTimeField F(s.S, grid);
    F.values(0, 0) = Complexd(1.0, -2.0);
    F.values(3, 2) = 0.5;
    json ffj = field_to_json(F);
    SpaceTimeField Fb = field_from_json(s.S, ffj);
    CHECK((Fb.values - F.values).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK(Fb.grid.size() == F.grid.size());

    CHECK(complex_fingerprint(s.X) == "6v1d_6");
}
