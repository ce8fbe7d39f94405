#pragma once

// Planted models and instance sampling: exact Q_sigma clause draws, uniform
// U_k draws, the parity channel obtained by restricting clauses to the minimal
// Fourier witness, lazily sampled Bernoulli formulas, and labeled Goldreich
// tuples for predicate models.

#include <cstdint>
#include <optional>
#include <vector>

#include "plantedcsp/clause_space.hpp"
#include "plantedcsp/distribution.hpp"
#include "plantedcsp/rng.hpp"

namespace plantedcsp {

using Formula = std::vector<Clause>;

struct GoldreichSample {
    std::vector<std::int32_t> variables;  // ordered, distinct
    std::int8_t label = 0;                // +1 if P = 1, -1 if P = 0
};

class PlantedModel {
public:
    PlantedModel(ClauseDistribution q, Assignment sigma);
    PlantedModel(Predicate p, Assignment sigma);

    std::int32_t n() const { return static_cast<std::int32_t>(sigma_.size()); }
    std::int32_t k() const;
    bool is_predicate() const { return predicate_.has_value(); }
    const ClauseDistribution& distribution() const;
    const Predicate& predicate() const;
    const Assignment& sigma() const { return sigma_; }

    // Q_sigma(C) = 2^k Q(sigma(C)) / |X_k| (patterns are equinumerous).
    double clause_probability(const Clause& clause) const;

    // Pattern mask drawn with probability Q(y) (clause models only).
    std::uint32_t sample_pattern(Rng& rng) const;

private:
    std::optional<ClauseDistribution> q_;
    std::optional<Predicate> predicate_;
    Assignment sigma_;
    std::vector<double> pattern_cdf_;  // cumulative weights for the two-stage draw
};

Assignment random_assignment(std::int32_t n, Rng& rng);

// Uniform draw from X_k: ordered distinct variables, independent fair signs.
Clause sample_uniform_clause(std::int32_t n, std::int32_t k, Rng& rng);

// Exact Q_sigma draw: pattern y ~ Q, then a uniform ordered distinct-variable
// tuple with negations chosen so that evaluate_pattern(sigma, C) = y.
Clause sample_planted_clause(const PlantedModel& model, Rng& rng);

// m i.i.d. Q_sigma clauses.
Formula sample_formula(const PlantedModel& model, std::uint64_t m, Rng& rng);

// The r-clause parity channel induced by subsampling to the minimal witness.
struct ParityChannel {
    std::int32_t k = 0;                  // source arity
    std::int32_t r = 0;                  // channel arity = |witness|
    double delta = 0.0;                  // 1 + (-1)^r 2^k Qhat(S)
    std::vector<std::int32_t> positions; // witness S, ascending 0-based
    std::vector<double> marginal;        // exact table over {+-1}^r pattern masks

    Clause restrict(const Clause& k_clause) const { return restrict_clause(k_clause, positions); }
};

// Builds the channel for a certified minimal witness and verifies, by brute
// force over the 2^k strings, that the marginal of Q on S equals the two-value
// parity table {delta/2^r, (2-delta)/2^r} (delta on even #FALSE strings).
// Throws if |Qhat(S)| is below tolerance (delta = 1 carries no signal).
ParityChannel subsample_to_parity(const ClauseDistribution& q, const ComplexityCertificate& cert,
                                  double tolerance = kFourierZeroTolerance);

// m planted k-clauses pushed through the channel restriction.
Formula sample_channel_formula(const PlantedModel& model, const ParityChannel& channel,
                               std::uint64_t m, Rng& rng);

// Bernoulli formula Q_{sigma,p} over arity-r clauses: every clause with an
// even number of TRUE literals under sigma is included independently with
// probability delta*p, odd with (2-delta)*p. Sampled lazily by drawing the two
// class counts and then distinct uniform class members; X_r is never
// materialized. Requires p*max(delta, 2-delta) <= 1.
Formula sample_bernoulli_formula(const ParityChannel& channel, const Assignment& sigma, double p,
                                 Rng& rng);

// Labeled Goldreich sample: uniform ordered distinct-variable tuple plus the
// predicate value on sigma restricted to it.
GoldreichSample sample_goldreich(const PlantedModel& model, Rng& rng);

// Clause distribution induced by conditioning Goldreich samples on label +1
// and reading tuples as all-positive-literal clauses: Q(y) = P(y) / |P^{-1}(1)|.
ClauseDistribution induced_clause_distribution(const Predicate& p);

}  // namespace plantedcsp
