#pragma once

// Recovery of the planted assignment from subsampled r-clauses: discrete
// power iteration on the (never materialized) bipartite clause matrix,
// GF(2) parity decoding of the recovered truth vector, and held-out
// likelihood disambiguation. Two drivers share all arithmetic: a direct one
// consuming clause streams and a statistical one consuming 1-MSTAT oracle
// queries; on a shared seeded stream they produce identical results.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "plantedcsp/clause_space.hpp"
#include "plantedcsp/distribution.hpp"
#include "plantedcsp/oracles.hpp"
#include "plantedcsp/planting.hpp"
#include "plantedcsp/rng.hpp"

namespace plantedcsp {

inline constexpr std::uint64_t kDefaultMemoryCapEntries = std::uint64_t{1} << 31;

struct MemoryCapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bipartite split of arity-r clauses: rows index the first ceil(r/2) literals,
// columns the remaining floor(r/2).
struct BipartiteShape {
    std::int32_t n = 0;
    std::int32_t r = 0;
    std::int32_t row_ell = 0;
    std::int32_t col_ell = 0;
    std::uint64_t rows = 0;       // N1
    std::uint64_t cols = 0;       // N2
    double geometric_size = 0.0;  // sqrt(N1 * N2)
    TupleIndexer row_indexer;
    TupleIndexer col_indexer;

    BipartiteShape(std::int32_t n, std::int32_t r,
                   std::uint64_t memory_cap_entries = kDefaultMemoryCapEntries);

    std::pair<std::uint64_t, std::uint64_t> entry(const Clause& r_clause) const;
};

// Truth vector over literal ell-tuples: +1 on tuples with an even number of
// TRUE literals under sigma, -1 on odd. The planted signal direction.
std::vector<std::int8_t> truth_vector(const Assignment& sigma, const TupleIndexer& indexer);

// Streaming multiply: accumulates one +1 entry per clause at (row, col).
// Centered variants subtract p_eff * sum(x) from every coordinate, removing
// the all-ones background (p_eff = m / |X_r|).
std::vector<double> formula_multiply(const Formula& r_clauses, const BipartiteShape& shape,
                                     const std::vector<double>& x, bool transpose);

// P(round(z)_j = sign(z_j)) = 1/2 + |z_j| / (2 max|z|); sign(0) is a fair coin.
std::vector<double> randomized_round(const std::vector<double>& z, Rng& rng);

// sign(z_j) with sign(0) = 0.
std::vector<double> ternary_round(const std::vector<double>& z);

// sign(z_j) in {+-1}; zeros resolved by fair coins.
std::vector<std::int8_t> sign_round(const std::vector<double>& z, Rng& rng);

// One fresh-formula multiply per call. Implementations: direct clause stream
// or 1-MSTAT oracle passes. `x` entries are in {-1, 0, +1}.
class MatVecSource {
public:
    virtual ~MatVecSource() = default;
    // centered: subtract p_eff * sum(x) from each output coordinate.
    virtual std::vector<double> multiply_fresh(const std::vector<double>& x, bool transpose,
                                               bool centered) = 0;
};

struct PowerIterationResult {
    std::vector<std::int8_t> u_star;  // over rows for even r, columns for odd r
    std::int32_t iterations = 0;
};

// Subsampled power iteration. Even r: per round z = Mx - p_eff*sum(x) with a
// fresh formula, x = randomized_round(z); after `rounds` rounds one extra
// fresh multiply and a hard sign. Odd r: per round y = ternary_round(M_A x)
// (uncentered), then x = randomized_round(M_B^T y - p_eff*sum(y)) with a
// second fresh formula; the last round takes the hard sign instead.
PowerIterationResult power_iterate(const BipartiteShape& shape, MatVecSource& source,
                                   std::int32_t rounds, Rng& rng);

struct DecodeOptions {
    double min_agreement = 2.0 / 3.0;  // per-variable-set majority threshold
    std::int32_t max_free_vars = 12;   // enumeration cap on unconstrained vars
};

struct DecodeResult {
    bool success = false;
    std::vector<Assignment> solutions;
    std::string failure_reason;
    std::uint64_t equations = 0;
    std::uint64_t dropped_var_sets = 0;
};

// Converts a (possibly noisy) truth vector into assignments: one parity
// equation per variable set (majority-filtered), then GF(2) elimination.
// Entries of u_star with value 0 abstain. `coordinates` optionally limits the
// votes to a subset of tuple indices.
DecodeResult parity_decode(const std::vector<std::int8_t>& u_star, const TupleIndexer& indexer,
                           const DecodeOptions& options = {},
                           const std::vector<std::uint64_t>* coordinates = nullptr);

struct Disambiguation {
    std::vector<Assignment> tie_class;  // argmax set of the held-out score
    double best_score = 0.0;
    double llr_per_clause = 0.0;        // best score against the uniform baseline
};

// Held-out log-likelihood sum log Q(sigma_hat(C)); candidates hitting a
// zero-probability pattern score -inf. Exact ties form the tie class.
Disambiguation disambiguate(const ClauseDistribution& q, const std::vector<Assignment>& candidates,
                            const Formula& heldout_k_clauses);

struct SolveOptions {
    std::uint64_t m = 0;                 // total k-clause budget
    double heldout_fraction = 0.1;
    std::optional<std::int32_t> rounds;  // default ceil(log2(sqrt(N1 N2)))
    std::int32_t max_restarts = 0;       // extra attempts on decode failure, fresh samples each
    DecodeOptions decode;
    std::uint64_t memory_cap_entries = kDefaultMemoryCapEntries;
};

struct SolveReport {
    std::int32_t n = 0;
    std::int32_t k = 0;
    std::int32_t r = 0;
    double delta = 0.0;
    std::uint64_t m_used = 0;     // k-clause samples consumed (direct mode)
    std::uint64_t queries = 0;    // oracle calls (statistical mode)
    std::int32_t iterations = 0;
    bool success = false;         // decode produced candidates
    bool recovered = false;       // true sigma lies in the tie class (when known)
    double agreement_fraction = 0.0;
    std::size_t tie_class_size = 0;
    double wall_ms = 0.0;
    double llr_per_clause = 0.0;
    std::string failure_reason;
    std::vector<Assignment> tie_class;

    std::string to_json() const;
};

// Direct mode: consumes k-clauses from the stream (restriction to the witness
// happens inside), runs the iteration, decodes both u* and -u*, and
// disambiguates on held-out clauses. `truth` (when given) is only used to fill
// the recovered/agreement fields.
SolveReport solve_from_stream(const ClauseDistribution& q, ClauseStream& stream,
                              const SolveOptions& options, Rng solver_rng,
                              const Assignment* truth = nullptr);

// Statistical mode: identical arithmetic, but every sample is consumed through
// 1-MSTAT queries (value range {0..N1} or {0..N2}, 0 = reject); row/column
// counts for the same clauses are obtained by rewinding the session stream.
SolveReport solve_via_oracle(const ClauseDistribution& q, OracleSession<Clause>& session,
                             const SolveOptions& options, Rng solver_rng,
                             const Assignment* truth = nullptr);

// Convenience wrapper: builds the stream from the model and evaluates against
// its planted assignment.
SolveReport solve_planted(const PlantedModel& model, const SolveOptions& options, Rng stream_rng,
                          Rng solver_rng);

}  // namespace plantedcsp
