#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include "plantedcsp/theory_lab.hpp"

using namespace plantedcsp;

namespace {

ClauseDistribution random_table(std::int32_t k, Rng& rng) {
    std::vector<double> w(std::size_t{1} << k);
    double total = 0.0;
    for (double& v : w) {
        v = rng.uniform01() + 0.01;
        total += v;
    }
    for (double& v : w) v /= total;
    return ClauseDistribution::from_table(k, std::move(w));
}

Assignment assignment_from_mask(std::int32_t n, std::uint32_t mask) {
    Assignment sigma(static_cast<std::size_t>(n));
    for (std::int32_t v = 0; v < n; ++v)
        sigma[static_cast<std::size_t>(v)] = ((mask >> v) & 1u) ? -1 : 1;
    return sigma;
}

double single_norm_reference(const ClauseDistribution& q) {
    double sum = 0.0;
    for (std::uint32_t s = 1; s < q.table_size(); ++s) {
        const double c = std::ldexp(q.fourier_coefficient(s), q.k());
        sum += c * c;
    }
    return std::sqrt(sum);
}

}  // namespace

TEST_CASE("parity advantage routes agree") {
    Rng rng(201);
    for (const std::int32_t ell : {1, 2, 3}) {
        for (int rep = 0; rep < 5; ++rep) {
            const Assignment sigma = random_assignment(6, rng);
            const QueryVector g = QueryVector::random(6, ell, rng);
            const double by_expectation = gamma_expectation(sigma, g);
            const double by_characters = gamma_polynomial(sigma, g);
            CHECK(std::fabs(by_expectation - by_characters) <= 1e-12);

            // Both equal the inner product with the density deviation.
            const QueryVector dev = density_deviation(sigma, ell);
            double dot = 0.0;
            for (std::size_t i = 0; i < g.values.size(); ++i) dot += dev.values[i] * g.values[i];
            CHECK(std::fabs(by_expectation - dot) <= 1e-12);
        }
    }
}

TEST_CASE("single literal indicator has advantage 1[sigma_v = -1]/n - 1/(2n)") {
    const std::int32_t n = 5;
    const TupleIndexer indexer(n, 1);
    QueryVector g = QueryVector::zero(n, 1);
    g.values[indexer.index({{2, false}})] = 1.0;

    Assignment sigma(n, 1);
    sigma[2] = -1;
    CHECK(gamma_expectation(sigma, g) == doctest::Approx(1.0 / 5 - 1.0 / 10).epsilon(1e-12));
    CHECK(gamma_polynomial(sigma, g) == doctest::Approx(0.1).epsilon(1e-12));
    sigma[2] = 1;
    CHECK(gamma_expectation(sigma, g) == doctest::Approx(-0.1).epsilon(1e-12));
    CHECK(gamma_polynomial(sigma, g) == doctest::Approx(-0.1).epsilon(1e-12));
}

TEST_CASE("projection matches its definition") {
    const std::int32_t n = 5;
    const std::int32_t k = 3;
    Rng rng(211);
    const QueryVector h = QueryVector::random(n, k, rng);
    const TupleIndexer full(n, k);

    for (const std::vector<std::int32_t>& positions :
         {std::vector<std::int32_t>{0, 2}, std::vector<std::int32_t>{1}}) {
        const auto ell = static_cast<std::int32_t>(positions.size());
        const TupleIndexer small(n, ell);
        const QueryVector projected = project_query(h, positions);
        REQUIRE(projected.ell == ell);
        REQUIRE(projected.values.size() == small.size());

        std::vector<double> manual(small.size(), 0.0);
        for (std::uint64_t idx = 0; idx < full.size(); ++idx) {
            const Clause clause = full.unindex(idx);
            manual[small.index(restrict_clause(clause, positions))] += h.values[idx];
        }
        const double scale =
            static_cast<double>(small.size()) / static_cast<double>(full.size());
        for (std::uint64_t c = 0; c < small.size(); ++c)
            CHECK(std::fabs(projected.values[c] - scale * manual[c]) <= 1e-12);
    }
}

TEST_CASE("planted advantage decomposes into Fourier-weighted parity advantages") {
    Rng rng(221);
    std::vector<ClauseDistribution> sources = {
        ClauseDistribution::planted_uniform_sat(3),
        ClauseDistribution::planted_xor(3),
        ClauseDistribution::noisy_parity3(0.4),
        ClauseDistribution::from_symmetric(
            4, {0.0, 3.0 / 32.0, 1.0 / 16.0, 1.0 / 32.0, 1.0 / 8.0}),
    };
    for (int rep = 0; rep < 5; ++rep) sources.push_back(random_table(3, rng));

    for (const ClauseDistribution& q : sources) {
        const Assignment sigma = random_assignment(5, rng);
        const QueryVector h = QueryVector::random(5, q.k(), rng);
        const DecompositionCheck check = check_decomposition(q, sigma, h);
        CHECK(check.residual <= 1e-12);
        CHECK(std::fabs(check.lhs - delta(q, sigma, h)) <= 1e-15);
    }
}

TEST_CASE("planted advantage hand value for parity sources") {
    // The odd-parity indicator has expectation 1 under planted XOR and 1/2
    // under the uniform law.
    const ClauseDistribution q = ClauseDistribution::planted_xor(3);
    Rng rng(223);
    const Assignment sigma = random_assignment(5, rng);
    const TupleIndexer indexer(5, 3);
    QueryVector h = QueryVector::zero(5, 3);
    for (std::uint64_t idx = 0; idx < indexer.size(); ++idx) {
        const int trues = std::popcount(evaluate_pattern(sigma, indexer.unindex(idx)));
        h.values[idx] = (trues % 2 == 1) ? 1.0 : 0.0;
    }
    CHECK(std::fabs(delta(q, sigma, h) - 0.5) <= 1e-12);

    // A constant query carries no advantage.
    QueryVector ones = QueryVector::zero(5, 3);
    for (double& v : ones.values) v = 1.0;
    CHECK(std::fabs(delta(q, sigma, ones)) <= 1e-12);
}

TEST_CASE("labeled advantage decomposes through predicate coefficients") {
    Rng rng(231);
    std::vector<Predicate> predicates;
    predicates.emplace_back(3, std::vector<std::uint8_t>{0, 1, 1, 0, 1, 0, 0, 1});  // odd parity
    predicates.emplace_back(3, std::vector<std::uint8_t>{0, 0, 0, 1, 0, 1, 1, 1});  // majority
    predicates.emplace_back(2, std::vector<std::uint8_t>{0, 0, 0, 1});              // conjunction
    for (int rep = 0; rep < 3; ++rep) {
        std::vector<std::uint8_t> table(8, 0);
        for (auto& bit : table) bit = rng.uniform01() < 0.5 ? 1 : 0;
        table[1] = 1;  // keep it non-constant
        table[2] = 0;
        predicates.emplace_back(3, std::move(table));
    }

    for (const Predicate& p : predicates) {
        const Assignment sigma = random_assignment(5, rng);
        const LabeledQueryVector h = LabeledQueryVector::random(5, p.k(), rng);
        const DecompositionCheck check = check_decomposition_goldreich(p, sigma, h);
        CHECK(check.residual <= 1e-12);
        CHECK(std::fabs(check.lhs - delta_goldreich(p, sigma, h)) <= 1e-15);
    }
}

TEST_CASE("labeled advantage base case reads the bare label") {
    LabeledQueryVector g = LabeledQueryVector::zero(4, 0);
    REQUIRE(g.values.size() == 2);
    g.values[0] = 0.7;   // label +1
    g.values[1] = -0.3;  // label -1
    Rng rng(233);
    const Assignment sigma = random_assignment(4, rng);
    CHECK(gamma_labeled(sigma, g) == doctest::Approx(0.5).epsilon(1e-12));

    // Projecting onto the empty position set averages tuples per label.
    const LabeledQueryVector h = LabeledQueryVector::random(5, 3, rng);
    const LabeledQueryVector base = project_labeled(h, {});
    REQUIRE(base.values.size() == 2);
    const VarTupleIndexer tuples(5, 3);
    for (const std::int8_t label : {std::int8_t{1}, std::int8_t{-1}}) {
        double mean = 0.0;
        for (std::uint64_t t = 0; t < tuples.size(); ++t) mean += h.at(t, label);
        mean /= static_cast<double>(tuples.size());
        CHECK(std::fabs(base.at(0, label) - mean) <= 1e-12);
    }
}

TEST_CASE("pair correlation depends only on the agreement count") {
    const ClauseDistribution q = ClauseDistribution::planted_uniform_sat(3);
    const std::int32_t n = 4;
    const TupleIndexer indexer(n, 3);

    auto deviation = [&](const Assignment& sigma, const Clause& c) {
        return std::ldexp(q.weight(evaluate_pattern(sigma, c)), q.k()) - 1.0;
    };
    auto brute = [&](const Assignment& a, const Assignment& b) {
        double sum = 0.0;
        for (std::uint64_t idx = 0; idx < indexer.size(); ++idx) {
            const Clause c = indexer.unindex(idx);
            sum += deviation(a, c) * deviation(b, c);
        }
        return sum / static_cast<double>(indexer.size());
    };

    const Assignment base = assignment_from_mask(n, 0b0000);
    for (const std::uint32_t mask : {0b0000u, 0b0011u, 0b0111u, 0b1111u}) {
        const Assignment other = assignment_from_mask(n, mask);
        const std::int32_t agreements = n - std::popcount(mask);
        CHECK(std::fabs(pair_correlation(q, n, agreements) - brute(base, other)) <= 1e-12);
    }
    // Same agreement count, different variables: identical value.
    CHECK(pair_correlation(q, n, 2) ==
          doctest::Approx(brute(assignment_from_mask(n, 0b0101), assignment_from_mask(n, 0b0110)))
              .epsilon(1e-12));

    // Full agreement reduces to the squared-coefficient sum.
    CHECK(std::fabs(pair_correlation(q, n, n) - 1.0 / 7.0) <= 1e-12);
}

TEST_CASE("single-assignment norm has a closed form") {
    Rng rng(241);
    const Assignment sigma = random_assignment(6, rng);
    const ClauseDistribution sat = ClauseDistribution::planted_uniform_sat(3);
    CHECK(std::fabs(discrimination_norm(sat, 6, {sigma}) - std::sqrt(1.0 / 7.0)) <= 1e-12);

    const ClauseDistribution parity = ClauseDistribution::planted_xor(3);
    CHECK(std::fabs(discrimination_norm(parity, 6, {sigma}) - 1.0) <= 1e-12);

    const ClauseDistribution table = random_table(3, rng);
    CHECK(std::fabs(discrimination_norm(table, 6, {sigma}) - single_norm_reference(table)) <=
          1e-12);
}

TEST_CASE("norm routes agree") {
    Rng rng(251);

    SUBCASE("Gram walk versus direct enumeration on tiny families") {
        for (const ClauseDistribution& q : {ClauseDistribution::planted_uniform_sat(3),
                                            ClauseDistribution::noisy_parity3(0.4)}) {
            std::vector<Assignment> sigmas;
            for (int i = 0; i < 4; ++i) sigmas.push_back(random_assignment(5, rng));
            const double walk = discrimination_norm(q, 5, sigmas);
            const double direct = discrimination_norm_enumerated(q, 5, sigmas);
            CHECK(std::fabs(walk - direct) <= 1e-12);
        }
    }

    SUBCASE("full-family eigenvalue route versus the Gram walk") {
        for (const ClauseDistribution& q :
             {ClauseDistribution::planted_uniform_sat(3), random_table(3, rng)}) {
            std::vector<Assignment> family;
            for (std::uint32_t mask = 0; mask < 16; ++mask)
                family.push_back(assignment_from_mask(4, mask));
            CHECK(std::fabs(discrimination_norm_full(q, 4) - discrimination_norm(q, 4, family)) <=
                  1e-9);
        }
    }

    SUBCASE("family size caps are enforced") {
        const ClauseDistribution q = ClauseDistribution::planted_uniform_sat(3);
        std::vector<Assignment> too_many;
        for (int i = 0; i < kGrayCodeCap + 1; ++i) too_many.push_back(random_assignment(5, rng));
        CHECK_THROWS(discrimination_norm(q, 5, too_many));
        std::vector<Assignment> small(static_cast<std::size_t>(kEnumeratedCap) + 1,
                                      random_assignment(5, rng));
        CHECK_THROWS(discrimination_norm_enumerated(q, 5, small));
    }
}

TEST_CASE("norm probe reports one-sided results over the divisor grid") {
    const ClauseDistribution q = ClauseDistribution::planted_uniform_sat(3);
    Rng rng(261);
    const std::vector<std::uint64_t> grid = {1, 2, 4};

    SUBCASE("an impossible bound never passes") {
        const SdnReport report = sdn_probe(q, 4, 0.0, grid, 2, rng);
        CHECK(report.kappa == 0.0);
        CHECK(report.largest_passing_q == 0);
        REQUIRE(report.rows.size() == grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            CHECK(report.rows[i].q == grid[i]);
            CHECK(report.rows[i].subset_size == (16 + grid[i] - 1) / grid[i]);
            CHECK(!report.rows[i].pass);
            CHECK(report.rows[i].max_kappa2 > 0.0);
        }
    }

    SUBCASE("a generous bound passes everywhere") {
        const SdnReport report = sdn_probe(q, 4, 1e6, grid, 2, rng);
        CHECK(report.largest_passing_q == 4);
        for (const SdnRow& row : report.rows) CHECK(row.pass);
    }

    SUBCASE("the q = 1 row is the exact full-family norm") {
        const SdnReport report = sdn_probe(q, 4, 1.0, {1}, 1, rng);
        REQUIRE(report.rows.size() == 1);
        CHECK(std::fabs(report.rows[0].max_kappa2 - discrimination_norm_full(q, 4)) <= 1e-9);
    }
}
