#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "plantedcsp/calibration.hpp"
#include "plantedcsp/dimacs.hpp"
#include "plantedcsp/experiments.hpp"
#include "plantedcsp/oracles.hpp"
#include "plantedcsp/planting.hpp"

using namespace plantedcsp;

namespace {

ModelConfig symmetric_pair_model() {
    return load_model_config(R"({"k": 2, "symmetric": [0.375, 0.125, 0.375]})");
}

Formula sample_planted_formula(std::int32_t n, std::size_t m, std::uint64_t seed) {
    Rng rng(seed);
    const ClauseDistribution q = ClauseDistribution::planted_uniform_sat(3);
    const Assignment sigma = random_assignment(n, rng);
    ClauseStream stream(PlantedModel(q, sigma), rng.derive(1));
    Formula formula;
    formula.reserve(m);
    for (std::size_t i = 0; i < m; ++i) formula.push_back(stream.next());
    return formula;
}

}  // namespace

TEST_CASE("DIMACS text format") {
    const Formula formula = {{{0, false}, {1, true}}};
    CHECK(to_dimacs(formula, 3) == "p cnf 3 1\n1 -2 0\n");
    CHECK_THROWS_AS(to_dimacs(formula, 0), std::invalid_argument);
    // Clause mentions variable 2, outside a 1-variable instance.
    CHECK_THROWS_AS(to_dimacs(formula, 1), std::invalid_argument);
}

TEST_CASE("DIMACS export then parse reproduces the exact bytes") {
    const Formula formula = sample_planted_formula(8, 50, 301);
    const std::string text = to_dimacs(formula, 8);
    const DimacsInstance parsed = parse_dimacs(text);
    CHECK(parsed.n == 8);
    CHECK(parsed.formula == formula);
    CHECK(to_dimacs(parsed.formula, parsed.n) == text);
}

TEST_CASE("DIMACS file round trip") {
    const Formula formula = sample_planted_formula(6, 20, 303);
    const std::string path = "test_roundtrip.cnf";
    write_dimacs_file(path, formula, 6);
    const DimacsInstance parsed = read_dimacs_file(path);
    CHECK(parsed.formula == formula);
    std::remove(path.c_str());
    CHECK_THROWS_AS(read_dimacs_file("does_not_exist.cnf"), std::runtime_error);
}

TEST_CASE("DIMACS parser accepts comments and rejects malformed input") {
    const DimacsInstance ok = parse_dimacs("c generated\nc another comment\np cnf 4 1\n1 -3 4 0\n");
    CHECK(ok.n == 4);
    REQUIRE(ok.formula.size() == 1);
    CHECK(ok.formula[0] == Clause{{0, false}, {2, true}, {3, false}});

    CHECK_THROWS_AS(parse_dimacs(""), std::invalid_argument);
    CHECK_THROWS_AS(parse_dimacs("p dnf 3 1\n1 0\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_dimacs("p cnf 0 0\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_dimacs("p cnf 3 2\n1 0\n"), std::invalid_argument);   // count mismatch
    CHECK_THROWS_AS(parse_dimacs("p cnf 3 1\n1 4 0\n"), std::invalid_argument); // var out of range
    CHECK_THROWS_AS(parse_dimacs("p cnf 3 1\n1 -1 0\n"), std::invalid_argument); // repeated var
    CHECK_THROWS_AS(parse_dimacs("p cnf 3 1\n1 2\n"), std::invalid_argument);   // unterminated
    CHECK_THROWS_AS(parse_dimacs("p cnf 3 1\n0\n"), std::invalid_argument);     // empty clause
}

TEST_CASE("budget resolution") {
    ExperimentConfig config;
    config.model = symmetric_pair_model();
    config.n = 100;

    SUBCASE("an explicit m wins over everything") {
        config.m = 777;
        config.m_coef = 5.0;
        CHECK(resolve_budget(config, 2) == 777);
    }

    SUBCASE("the coefficient rule is ceil(coef * n^{r/2} * ln n)") {
        config.m_coef = 10.0;
        const double expected = 10.0 * 100.0 * std::log(100.0);
        CHECK(resolve_budget(config, 2) == static_cast<std::uint64_t>(std::ceil(expected)));
        const double expected_r3 = 10.0 * std::pow(100.0, 1.5) * std::log(100.0);
        CHECK(resolve_budget(config, 3) == static_cast<std::uint64_t>(std::ceil(expected_r3)));
    }

    SUBCASE("defaults come from the calibrated constants") {
        CHECK(resolve_budget(config, 1) ==
              static_cast<std::uint64_t>(
                  std::ceil(calibration::kRecoveryCoefR1 * 10.0 * std::log(100.0))));
        CHECK(resolve_budget(config, 2) ==
              static_cast<std::uint64_t>(
                  std::ceil(calibration::kRecoveryCoefR2 * 100.0 * std::log(100.0))));
        CHECK(resolve_budget(config, 3) ==
              static_cast<std::uint64_t>(
                  std::ceil(calibration::kRecoveryCoefR3 * 1000.0 * std::log(100.0))));
        CHECK_THROWS_AS(resolve_budget(config, 4), std::invalid_argument);
        config.m = 500;
        CHECK(resolve_budget(config, 4) == 500);  // explicit m still fine
    }

    SUBCASE("degenerate n is rejected") {
        config.n = 1;
        config.m_coef = 10.0;
        CHECK_THROWS_AS(resolve_budget(config, 2), std::invalid_argument);
    }
}

TEST_CASE("recovery experiment is reproducible and mode-consistent") {
    ExperimentConfig config;
    config.model = symmetric_pair_model();
    config.n = 30;
    config.trials = 3;
    config.seed = 11;

    const RecoveryResult direct = run_recovery_experiment(config);
    CHECK(direct.recovery_rate == 1.0);
    for (const RecoveryTrialRow& row : direct.rows) {
        CHECK(row.mode == "direct");
        CHECK(row.r == 2);
        CHECK(row.recovered);
        CHECK(row.m == resolve_budget(config, 2));
    }

    const RecoveryResult again = run_recovery_experiment(config);
    CHECK(strip_wall_ms(recovery_csv(direct)) == strip_wall_ms(recovery_csv(again)));
    CHECK(recovery_csv(direct).rfind("# plantedcsp recovery v1\n", 0) == 0);

    config.mode = SolveMode::oracle;
    const RecoveryResult oracle = run_recovery_experiment(config);
    REQUIRE(oracle.rows.size() == direct.rows.size());
    for (std::size_t i = 0; i < oracle.rows.size(); ++i) {
        CHECK(oracle.rows[i].mode == "oracle");
        CHECK(oracle.rows[i].recovered == direct.rows[i].recovered);
        CHECK(oracle.rows[i].queries > 0);
    }
}

TEST_CASE("strip_wall_ms drops exactly the trailing column") {
    const std::string csv = "# plantedcsp recovery v1\na,b,wall_ms\n1,2,3.25\n";
    CHECK(strip_wall_ms(csv) == "# plantedcsp recovery v1\na,b\n1,2\n");
}

TEST_CASE("distinguishing experiment separates planted from uniform at strong budgets") {
    ExperimentConfig config;
    config.model = symmetric_pair_model();
    config.n = 50;
    config.m = 400;
    config.trials = 10;
    config.seed = 17;

    const DistinguishResult result = run_distinguish_experiment(config);
    REQUIRE(result.rows.size() == 20);  // trials of each source
    CHECK(result.accuracy >= 0.9);
    for (const DistinguishTrialRow& row : result.rows) {
        CHECK(row.m == 400);
        CHECK(row.threshold == doctest::Approx(calibration::kDistinguishThreshold *
                                               std::sqrt(400.0)));
        CHECK((row.source == "planted" || row.source == "uniform"));
        CHECK(row.correct == (row.decided_planted == (row.source == "planted")));
    }

    const DistinguishResult again = run_distinguish_experiment(config);
    CHECK(distinguish_csv(result) == distinguish_csv(again));
    CHECK(distinguish_csv(result).rfind("# plantedcsp distinguish v1\n", 0) == 0);
}

TEST_CASE("budget sweeps report monotone-friendly success rates") {
    ExperimentConfig config;
    config.model = symmetric_pair_model();
    config.n = 30;
    config.trials = 5;
    config.seed = 23;

    const std::vector<SweepPoint> points = run_recovery_sweep(config, {100.0, 1200.0});
    REQUIRE(points.size() == 2);
    CHECK(points[0].coef == 100.0);
    CHECK(points[1].coef == 1200.0);
    for (const SweepPoint& point : points) {
        CHECK(point.trials == 5);
        CHECK(point.rate == doctest::Approx(static_cast<double>(point.successes) / 5.0));
    }
    ExperimentConfig at_coef = config;
    at_coef.m_coef = 100.0;
    CHECK(points[0].m == resolve_budget(at_coef, 2));
    CHECK(points[1].rate == 1.0);
    CHECK(points[0].rate <= points[1].rate);
    CHECK(sweep_csv(points).rfind("# plantedcsp sweep v1\n", 0) == 0);
}
