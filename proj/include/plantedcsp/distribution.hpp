#pragma once

// Clause distributions Q over {+-1}^k, their Walsh-Hadamard analysis, and the
// complexity certificate (smallest nonempty S with Qhat(S) != 0).
//
// Tables are indexed by the evaluation-pattern bitmask (bit i = position i is
// TRUE), so table[mask] = Q(y) with popcount(mask) = #TRUE literals in y.
// With y_i in {+-1} and TRUE = -1, the character is
//   chi_S(y) = prod_{i in S} y_i = (-1)^{popcount(mask & S)}.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace plantedcsp {

inline constexpr std::int32_t kMaxArity = 16;
inline constexpr double kWeightSumTolerance = 1e-9;
inline constexpr double kFourierZeroTolerance = 1e-9;

struct UniformDistributionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ComplexityCertificate {
    std::int32_t r = 0;                    // in [1, k]
    std::vector<std::int32_t> witness;     // 0-based positions, ascending, |witness| == r
    double magnitude = 0.0;                // |Qhat(witness)|
    std::uint32_t witness_mask = 0;
    double coefficient = 0.0;              // signed Qhat(witness)
};

class ClauseDistribution {
public:
    // Full table of 2^k nonnegative weights summing to 1. Rejects (does not
    // renormalize) tables whose sum deviates beyond tolerance.
    static ClauseDistribution from_table(std::int32_t k, std::vector<double> weights);

    // Per-string class values: full[mask] = per_true_count[popcount(mask)].
    static ClauseDistribution from_symmetric(std::int32_t k,
                                             const std::vector<double>& per_true_count);

    static ClauseDistribution uniform(std::int32_t k);

    // Q(all-FALSE) = 0, every other string 1/(2^k - 1).
    static ClauseDistribution planted_uniform_sat(std::int32_t k);

    // Supported on odd-#TRUE strings, each with weight 1/2^{k-1}.
    static ClauseDistribution planted_xor(std::int32_t k);

    // k=3, even-#TRUE strings delta'/8, odd (2-delta')/8. (The source table is
    // often quoted with /4 normalization, which sums to 2; /8 is the
    // probability table.)
    static ClauseDistribution noisy_parity3(double delta_prime);

    std::int32_t k() const { return k_; }
    std::uint32_t table_size() const { return 1u << k_; }
    double weight(std::uint32_t pattern_mask) const { return weights_[pattern_mask]; }
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<double>& fourier() const { return fourier_; }

    // Qhat(S) = 2^{-k} sum_y Q(y) chi_S(y); S as a position bitmask.
    double fourier_coefficient(std::uint32_t subset_mask) const;

    // Direct-summation evaluation (independent of the cached transform).
    double fourier_coefficient_direct(std::uint32_t subset_mask) const;

    bool is_uniform(double tolerance = kFourierZeroTolerance) const;

    // Smallest r >= 1 with a nonempty |S| = r and |Qhat(S)| > tolerance.
    // Witness: maximal |Qhat| at size r, ties broken by lexicographically
    // smallest ascending position sequence. Throws UniformDistributionError
    // when every nonempty coefficient vanishes.
    ComplexityCertificate complexity(double tolerance = kFourierZeroTolerance) const;

private:
    ClauseDistribution() = default;

    std::int32_t k_ = 0;
    std::vector<double> weights_;
    std::vector<double> fourier_;
};

// In-place Walsh-Hadamard transform (unnormalized): out[S] = sum_y in[y] chi_S(y).
void walsh_hadamard(std::vector<double>& values);

// Boolean predicate P: {+-1}^k -> {0,1} stored as a bit table over pattern
// masks. Complexity r(P) uses the same transform on the 0/1 table.
class Predicate {
public:
    Predicate(std::int32_t k, std::vector<std::uint8_t> truth_table);

    std::int32_t k() const { return k_; }
    bool value(std::uint32_t pattern_mask) const { return table_[pattern_mask] != 0; }
    const std::vector<std::uint8_t>& table() const { return table_; }

    // Phat(S) = 2^{-k} sum_y P(y) chi_S(y).
    double fourier_coefficient(std::uint32_t subset_mask) const;
    ComplexityCertificate complexity(double tolerance = kFourierZeroTolerance) const;

private:
    std::int32_t k_ = 0;
    std::vector<std::uint8_t> table_;
    std::vector<double> fourier_;
};

// Model configuration: JSON {"k": int, "table": [2^k floats]} or
// {"k": int, "symmetric": [k+1 floats]} or {"k": int, "predicate": [2^k bits]}.
// Exactly one of the three keys must be present.
struct ModelConfig {
    std::optional<ClauseDistribution> distribution;
    std::optional<Predicate> predicate;

    bool is_predicate() const { return predicate.has_value(); }
    std::int32_t k() const;
};

ModelConfig load_model_config(const std::string& json_text);
ModelConfig load_model_config_file(const std::string& path);

// Positions (ascending, 0-based) of the set bits of a mask.
std::vector<std::int32_t> mask_to_positions(std::uint32_t mask);

}  // namespace plantedcsp
