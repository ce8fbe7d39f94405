#include <doctest.h>

#include <bit>
#include <cmath>
#include <vector>

#include "plantedcsp/distribution.hpp"
#include "plantedcsp/rng.hpp"

using namespace plantedcsp;

namespace {

// Reference complexity search written independently of the library: scan
// subset sizes from 1 up, direct Fourier sums only.
std::int32_t brute_r(const ClauseDistribution& q, double tol = 1e-9) {
    for (std::int32_t size = 1; size <= q.k(); ++size) {
        for (std::uint32_t mask = 1; mask < q.table_size(); ++mask) {
            if (std::popcount(mask) != size) continue;
            if (std::fabs(q.fourier_coefficient_direct(mask)) > tol) return size;
        }
    }
    return 0;  // uniform
}

}  // namespace

TEST_CASE("planted uniform k-SAT first-order coefficient") {
    const ClauseDistribution q = ClauseDistribution::planted_uniform_sat(3);
    CHECK(q.weight(0) == 0.0);
    for (std::uint32_t y = 1; y < 8; ++y) CHECK(q.weight(y) == doctest::Approx(1.0 / 7).epsilon(1e-15));
    CHECK(q.fourier_coefficient(0b001) == doctest::Approx(-1.0 / 56).epsilon(1e-12));
    CHECK(q.fourier_coefficient(0b010) == doctest::Approx(-1.0 / 56).epsilon(1e-12));
    const ComplexityCertificate cert = q.complexity();
    CHECK(cert.r == 1);
    CHECK(cert.witness == std::vector<std::int32_t>{0});
    CHECK(cert.coefficient == doctest::Approx(-1.0 / 56).epsilon(1e-12));

    const ClauseDistribution q4 = ClauseDistribution::planted_uniform_sat(4);
    CHECK(q4.complexity().r == 1);
    CHECK(q4.fourier_coefficient(0b0001) == doctest::Approx(-1.0 / (16.0 * 15.0)).epsilon(1e-12));
}

TEST_CASE("planted XOR puts all weight on the top coefficient") {
    for (std::int32_t k = 3; k <= 5; ++k) {
        const ClauseDistribution q = ClauseDistribution::planted_xor(k);
        const std::uint32_t full = (1u << k) - 1;
        CHECK(q.fourier_coefficient(full) ==
              doctest::Approx(-std::pow(2.0, -k)).epsilon(1e-12));
        for (std::uint32_t mask = 1; mask < full; ++mask)
            CHECK(std::fabs(q.fourier_coefficient(mask)) < 1e-15);
        const ComplexityCertificate cert = q.complexity();
        CHECK(cert.r == k);
        CHECK(static_cast<std::int32_t>(cert.witness.size()) == k);
    }
}

TEST_CASE("noisy 3-parity coefficient tracks the retention parameter") {
    const ClauseDistribution q = ClauseDistribution::noisy_parity3(0.4);
    CHECK(q.fourier_coefficient(0b111) == doctest::Approx((0.4 - 1.0) / 8).epsilon(1e-12));
    CHECK(q.weight(0) == doctest::Approx(0.4 / 8).epsilon(1e-12));
    CHECK(q.weight(1) == doctest::Approx((2.0 - 0.4) / 8).epsilon(1e-12));
    CHECK(q.complexity().r == 3);
    // delta_prime = 1 recovers the uniform table.
    CHECK(ClauseDistribution::noisy_parity3(1.0).is_uniform());
    CHECK_THROWS(ClauseDistribution::noisy_parity3(-0.1));
    CHECK_THROWS(ClauseDistribution::noisy_parity3(2.1));
}

TEST_CASE("quiet 4-SAT table kills the first two Fourier levels") {
    const ClauseDistribution q = ClauseDistribution::from_symmetric(
        4, {0.0, 3.0 / 32, 1.0 / 16, 1.0 / 32, 1.0 / 8});
    for (std::uint32_t mask = 1; mask < 16; ++mask) {
        const int size = std::popcount(mask);
        const double coef = q.fourier_coefficient(mask);
        if (size <= 2) CHECK(std::fabs(coef) < 1e-15);
        if (size == 3) CHECK(coef == doctest::Approx(-1.0 / 64).epsilon(1e-12));
    }
    const ComplexityCertificate cert = q.complexity();
    CHECK(cert.r == 3);
    CHECK(cert.witness == std::vector<std::int32_t>{0, 1, 2});
    CHECK(cert.magnitude == doctest::Approx(1.0 / 64).epsilon(1e-12));
}

TEST_CASE("Walsh-Hadamard butterfly is an unnormalized involution") {
    Rng rng(11);
    std::vector<double> values(32);
    for (double& v : values) v = rng.uniform01() - 0.5;
    const std::vector<double> original = values;
    walsh_hadamard(values);
    walsh_hadamard(values);
    for (std::size_t i = 0; i < values.size(); ++i)
        CHECK(values[i] == doctest::Approx(32.0 * original[i]).epsilon(1e-12));
}

TEST_CASE("fast and direct Fourier coefficients agree on random tables") {
    Rng rng(19);
    for (int trial = 0; trial < 20; ++trial) {
        const std::int32_t k = 2 + static_cast<std::int32_t>(rng.below(5));  // up to k=6
        std::vector<double> weights(std::size_t{1} << k);
        double sum = 0.0;
        for (double& w : weights) {
            w = rng.uniform01();
            sum += w;
        }
        for (double& w : weights) w /= sum;
        const ClauseDistribution q = ClauseDistribution::from_table(k, weights);
        for (std::uint32_t mask = 0; mask < q.table_size(); ++mask)
            CHECK(q.fourier_coefficient(mask) ==
                  doctest::Approx(q.fourier_coefficient_direct(mask)).epsilon(1e-12));
        CHECK(q.complexity().r == brute_r(q));
    }
}

TEST_CASE("witness tie-break picks the lexicographically first maximizer") {
    // Qhat({1}) = +c and Qhat({2}) = -c with everything else flat: equal
    // magnitude, so the witness must be the smaller position sequence {1}.
    const double c = 0.05;
    std::vector<double> weights(8);
    for (std::uint32_t y = 0; y < 8; ++y) {
        const double chi1 = (y & 0b010) ? -1.0 : 1.0;
        const double chi2 = (y & 0b100) ? -1.0 : 1.0;
        weights[y] = 0.125 + c * chi1 - c * chi2;
    }
    const ClauseDistribution q = ClauseDistribution::from_table(3, weights);
    const ComplexityCertificate cert = q.complexity();
    CHECK(cert.r == 1);
    CHECK(cert.witness == std::vector<std::int32_t>{1});
    CHECK(cert.coefficient == doctest::Approx(c).epsilon(1e-12));
}

TEST_CASE("uniform tables certify as uniform") {
    const ClauseDistribution q = ClauseDistribution::uniform(3);
    CHECK(q.is_uniform());
    CHECK_THROWS_AS((void)q.complexity(), UniformDistributionError);
}

TEST_CASE("table validation") {
    CHECK_THROWS(ClauseDistribution::from_table(3, {0.5, 0.5}));          // wrong size
    CHECK_THROWS(ClauseDistribution::from_table(1, {1.2, -0.2}));         // negative mass
    std::vector<double> off(8, 1.0 / 8);
    off[0] += 1e-6;                                                        // does not sum to 1
    CHECK_THROWS(ClauseDistribution::from_table(3, off));
    CHECK_THROWS(ClauseDistribution::from_table(17, {}));                  // arity cap
    CHECK_THROWS(ClauseDistribution::from_symmetric(3, {0.1, 0.2, 0.3}));  // needs k+1 values
}

TEST_CASE("predicate Fourier and complexity") {
    const Predicate xor3(3, {0, 1, 1, 0, 1, 0, 0, 1});
    CHECK(xor3.fourier_coefficient(0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(xor3.fourier_coefficient(0b111) == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(xor3.complexity().r == 3);

    const Predicate maj3(3, {0, 0, 0, 1, 0, 1, 1, 1});
    CHECK(maj3.fourier_coefficient(0b001) == doctest::Approx(-0.25).epsilon(1e-15));
    CHECK(maj3.complexity().r == 1);

    CHECK_THROWS(Predicate(3, {0, 1}));          // wrong table size
    CHECK_THROWS(Predicate(2, {0, 2, 1, 1}));    // entries must be 0/1
    const Predicate constant(2, {1, 1, 1, 1});
    CHECK_THROWS_AS((void)constant.complexity(), UniformDistributionError);
}

TEST_CASE("model config loader") {
    const ModelConfig table = load_model_config(
        R"({"k": 2, "table": [0.375, 0.125, 0.125, 0.375]})");
    REQUIRE(!table.is_predicate());
    CHECK(table.k() == 2);
    CHECK(table.distribution->weight(0) == doctest::Approx(0.375));

    const ModelConfig sym = load_model_config(
        R"({"k": 3, "symmetric": [0.0, 0.14285714285714285, 0.14285714285714285, 0.14285714285714285]})");
    CHECK(sym.distribution->complexity().r == 1);

    const ModelConfig pred = load_model_config(
        R"({"k": 3, "predicate": [0, 1, 1, 0, 1, 0, 0, 1]})");
    REQUIRE(pred.is_predicate());
    CHECK(pred.predicate->complexity().r == 3);

    CHECK_THROWS(load_model_config(R"({"table": [1.0, 0.0]})"));  // missing k
    CHECK_THROWS(load_model_config(
        R"({"k": 1, "table": [1.0, 0.0], "symmetric": [1.0, 0.0]})"));  // ambiguous
    CHECK_THROWS(load_model_config(R"({"k": 1})"));
}

TEST_CASE("mask position helper") {
    CHECK(mask_to_positions(0b101) == std::vector<std::int32_t>{0, 2});
    CHECK(mask_to_positions(0).empty());
}
