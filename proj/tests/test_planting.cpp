#include <doctest.h>

#include <bit>
#include <cmath>
#include <set>
#include <vector>

#include "plantedcsp/clause_space.hpp"
#include "plantedcsp/planting.hpp"

using namespace plantedcsp;

namespace {

// Upper 0.01 critical values of the chi-square distribution; a correct
// sampler fails each check with probability 1% (seeds are fixed).
constexpr double kChi2Dof3 = 11.345;
constexpr double kChi2Dof6 = 16.812;
constexpr double kChi2Dof11 = 24.725;
constexpr double kChi2Dof23 = 41.638;

double chi_square(const std::vector<std::uint64_t>& observed,
                  const std::vector<double>& expected) {
    double stat = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double diff = static_cast<double>(observed[i]) - expected[i];
        stat += diff * diff / expected[i];
    }
    return stat;
}

}  // namespace

TEST_CASE("random assignments are balanced signs") {
    Rng rng(5);
    const Assignment sigma = random_assignment(1000, rng);
    REQUIRE(sigma.size() == 1000);
    int plus = 0;
    for (const std::int8_t v : sigma) {
        REQUIRE((v == 1 || v == -1));
        plus += v == 1;
    }
    CHECK(plus > 400);
    CHECK(plus < 600);
}

TEST_CASE("planted clause law matches the weight table over the whole space") {
    const ClauseDistribution q = ClauseDistribution::from_symmetric(2, {0.375, 0.125, 0.375});
    Rng rng(23);
    Assignment sigma = random_assignment(3, rng);
    const PlantedModel model(q, sigma);
    const TupleIndexer indexer(3, 2);
    REQUIRE(indexer.size() == 24);

    const std::uint64_t samples = 50000;
    std::vector<std::uint64_t> observed(24, 0);
    for (std::uint64_t i = 0; i < samples; ++i)
        ++observed[indexer.index(sample_planted_clause(model, rng))];

    std::vector<double> expected(24, 0.0);
    for (std::uint64_t idx = 0; idx < 24; ++idx) {
        const Clause clause = indexer.unindex(idx);
        expected[idx] = q.weight(evaluate_pattern(sigma, clause)) / 6.0 *
                        static_cast<double>(samples);
    }
    CHECK(chi_square(observed, expected) < kChi2Dof23);
}

TEST_CASE("planted SAT never emits the all-false pattern") {
    const ClauseDistribution q = ClauseDistribution::planted_uniform_sat(3);
    Rng rng(31);
    Assignment sigma = random_assignment(8, rng);
    const PlantedModel model(q, sigma);

    std::vector<std::uint64_t> patterns(8, 0);
    const std::uint64_t samples = 35000;
    for (std::uint64_t i = 0; i < samples; ++i)
        ++patterns[evaluate_pattern(sigma, sample_planted_clause(model, rng))];

    CHECK(patterns[0] == 0);
    std::vector<std::uint64_t> observed(patterns.begin() + 1, patterns.end());
    const std::vector<double> expected(7, static_cast<double>(samples) / 7.0);
    CHECK(chi_square(observed, expected) < kChi2Dof6);
}

TEST_CASE("parity channel for planted 3-SAT") {
    const ClauseDistribution q = ClauseDistribution::planted_uniform_sat(3);
    const ParityChannel channel = subsample_to_parity(q, q.complexity());
    CHECK(channel.k == 3);
    CHECK(channel.r == 1);
    CHECK(channel.positions == std::vector<std::int32_t>{0});
    CHECK(channel.delta == doctest::Approx(8.0 / 7).epsilon(1e-12));
    REQUIRE(channel.marginal.size() == 2);
    CHECK(channel.marginal[0] == doctest::Approx(3.0 / 7).epsilon(1e-12));
    CHECK(channel.marginal[1] == doctest::Approx(4.0 / 7).epsilon(1e-12));
}

TEST_CASE("parity channel for XOR and the quiet 4-SAT table") {
    const ClauseDistribution x3 = ClauseDistribution::planted_xor(3);
    const ParityChannel cx = subsample_to_parity(x3, x3.complexity());
    CHECK(cx.delta == doctest::Approx(2.0).epsilon(1e-12));
    for (std::uint32_t z = 0; z < 8; ++z) {
        const double want = (std::popcount(z) % 2 == 1) ? 0.25 : 0.0;
        CHECK(cx.marginal[z] == doctest::Approx(want).epsilon(1e-12));
    }

    const ClauseDistribution quiet = ClauseDistribution::from_symmetric(
        4, {0.0, 3.0 / 32, 1.0 / 16, 1.0 / 32, 1.0 / 8});
    const ParityChannel cq = subsample_to_parity(quiet, quiet.complexity());
    CHECK(cq.r == 3);
    CHECK(cq.delta == doctest::Approx(1.25).epsilon(1e-12));
    for (std::uint32_t z = 0; z < 8; ++z) {
        // delta lands on the strings with an even number of FALSE bits.
        const bool even_false = (3 - std::popcount(z)) % 2 == 0;
        const double want = (even_false ? 1.25 : 0.75) / 8.0;
        CHECK(cq.marginal[z] == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("channel-subsampled clauses follow the marginal") {
    const ClauseDistribution q = ClauseDistribution::planted_xor(3);
    const ParityChannel channel = subsample_to_parity(q, q.complexity());
    Rng rng(41);
    Assignment sigma = random_assignment(6, rng);
    const PlantedModel model(q, sigma);

    const Formula formula = sample_channel_formula(model, channel, 20000, rng);
    REQUIRE(formula.size() == 20000);
    std::vector<std::uint64_t> counts(8, 0);
    for (const Clause& clause : formula) {
        REQUIRE(clause.size() == 3);
        REQUIRE(clause_is_valid(clause, 6));
        ++counts[evaluate_pattern(sigma, clause)];
    }
    std::vector<std::uint64_t> observed;
    std::vector<double> expected;
    for (std::uint32_t z = 0; z < 8; ++z) {
        if (channel.marginal[z] == 0.0) {
            CHECK(counts[z] == 0);
        } else {
            observed.push_back(counts[z]);
            expected.push_back(channel.marginal[z] * 20000.0);
        }
    }
    CHECK(chi_square(observed, expected) < kChi2Dof3);
}

TEST_CASE("independent-inclusion formula stays in one parity class at delta=2") {
    const ClauseDistribution q = ClauseDistribution::planted_xor(3);
    const ParityChannel channel = subsample_to_parity(q, q.complexity());
    Rng rng(47);
    const Assignment sigma = random_assignment(10, rng);

    const double p = 0.01;
    const Formula formula = sample_bernoulli_formula(channel, sigma, p, rng);

    // Every arity-3 clause with an even number of TRUE literals is included
    // with probability delta*p = 0.02, the odd ones with (2-delta)*p = 0; the
    // even class has exactly |X_3|/2 = 2880 members at n=10.
    const TupleIndexer indexer(10, 3);
    std::set<std::uint64_t> seen;
    for (const Clause& clause : formula) {
        REQUIRE(clause_is_valid(clause, 10));
        CHECK(std::popcount(evaluate_pattern(sigma, clause)) % 2 == 0);
        CHECK(seen.insert(indexer.index(clause)).second);  // no duplicates
    }
    // Mean 57.6, sd 7.5; allow 4 sigma.
    CHECK(formula.size() >= 28);
    CHECK(formula.size() <= 88);

    CHECK_THROWS(sample_bernoulli_formula(channel, sigma, 0.6, rng));  // delta*p > 1
}

TEST_CASE("labeled tuple samples carry the predicate value") {
    const Predicate xor3(3, {0, 1, 1, 0, 1, 0, 0, 1});
    Rng rng(53);
    const Assignment sigma = random_assignment(4, rng);
    const PlantedModel model(xor3, sigma);
    const VarTupleIndexer indexer(4, 3);
    REQUIRE(indexer.size() == 24);

    const std::uint64_t samples = 24000;
    std::vector<std::uint64_t> counts(24, 0);
    for (std::uint64_t i = 0; i < samples; ++i) {
        const GoldreichSample s = sample_goldreich(model, rng);
        REQUIRE(s.variables.size() == 3);
        std::uint32_t pattern = 0;
        for (std::size_t j = 0; j < 3; ++j)
            if (sigma[static_cast<std::size_t>(s.variables[j])] == -1) pattern |= 1u << j;
        CHECK(s.label == (xor3.value(pattern) ? 1 : -1));
        ++counts[indexer.index(s.variables)];
    }
    const std::vector<double> expected(24, static_cast<double>(samples) / 24.0);
    CHECK(chi_square(counts, expected) < kChi2Dof23);
}

TEST_CASE("binary predicate tuples are uniform") {
    const Predicate and2(2, {0, 0, 0, 1});
    Rng rng(59);
    const Assignment sigma = random_assignment(4, rng);
    const PlantedModel model(and2, sigma);
    const VarTupleIndexer indexer(4, 2);
    REQUIRE(indexer.size() == 12);

    std::vector<std::uint64_t> counts(12, 0);
    for (int i = 0; i < 12000; ++i)
        ++counts[indexer.index(sample_goldreich(model, rng).variables)];
    const std::vector<double> expected(12, 1000.0);
    CHECK(chi_square(counts, expected) < kChi2Dof11);
}

TEST_CASE("label-one conditioning induces the XOR clause law") {
    const Predicate xor3(3, {0, 1, 1, 0, 1, 0, 0, 1});
    const ClauseDistribution induced = induced_clause_distribution(xor3);
    const ClauseDistribution reference = ClauseDistribution::planted_xor(3);
    for (std::uint32_t y = 0; y < 8; ++y)
        CHECK(induced.weight(y) == doctest::Approx(reference.weight(y)).epsilon(1e-12));
}

TEST_CASE("formula sampling length and validity") {
    const ClauseDistribution q = ClauseDistribution::planted_uniform_sat(3);
    Rng rng(61);
    const Assignment sigma = random_assignment(12, rng);
    const Formula formula = sample_formula(PlantedModel(q, sigma), 500, rng);
    REQUIRE(formula.size() == 500);
    for (const Clause& clause : formula) CHECK(clause_is_valid(clause, 12));
}
