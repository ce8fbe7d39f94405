#pragma once

// Core combinatorial domain: literals, ordered clauses with distinct variables,
// +-1 assignments, and bijective indexing of the tuple spaces.
//
// Conventions used throughout the library:
//   * variables are 0-based internally (CLI and DIMACS use 1-based ids),
//   * assignment values are +-1 with -1 meaning TRUE,
//   * a clause evaluation pattern is a bitmask where bit i is set iff the
//     literal at position i evaluates TRUE, so popcount(mask) = #TRUE.

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace plantedcsp {

struct Literal {
    std::int32_t variable = 0;  // 0-based
    bool negated = false;

    friend bool operator==(const Literal&, const Literal&) = default;
};

// Ordered tuple of literals over pairwise distinct variables.
using Clause = std::vector<Literal>;

// sigma[v] in {+1, -1}; -1 encodes TRUE.
using Assignment = std::vector<std::int8_t>;

// Number of ordered ell-tuples of literals with distinct variables over n
// variables: 2^ell * n * (n-1) * ... * (n-ell+1). Throws on overflow and on
// ell > n, so callers never see a silently wrapped size.
std::uint64_t count_tuples(std::int64_t n, std::int64_t ell);

// Number of ordered ell-tuples of distinct variables (no signs): n!/(n-ell)!.
std::uint64_t count_var_tuples(std::int64_t n, std::int64_t ell);

// Bijection between clauses (ordered distinct-variable literal tuples) and
// [0, count_tuples(n, ell)). Mixed-radix encoding with one (variable-rank,
// sign) digit pair per position; rank is taken among the not-yet-used
// variables in increasing order, so the map is a bijection by construction.
class TupleIndexer {
public:
    TupleIndexer(std::int32_t n, std::int32_t ell);

    std::int32_t n() const { return n_; }
    std::int32_t ell() const { return ell_; }
    std::uint64_t size() const { return size_; }

    std::uint64_t index(const Clause& clause) const;
    Clause unindex(std::uint64_t index) const;

private:
    std::int32_t n_;
    std::int32_t ell_;
    std::uint64_t size_;
};

// Same bijection for unsigned variable tuples (Goldreich samples, predicate
// mode): tuples in [0, n!/(n-ell)!).
class VarTupleIndexer {
public:
    VarTupleIndexer(std::int32_t n, std::int32_t ell);

    std::int32_t n() const { return n_; }
    std::int32_t ell() const { return ell_; }
    std::uint64_t size() const { return size_; }

    std::uint64_t index(const std::vector<std::int32_t>& vars) const;
    std::vector<std::int32_t> unindex(std::uint64_t index) const;

private:
    std::int32_t n_;
    std::int32_t ell_;
    std::uint64_t size_;
};

// Evaluation pattern of a clause under an assignment, as a bitmask over
// positions: bit i set iff literal i is TRUE, where literal (v, negated) is
// TRUE iff (sigma[v] == -1) != negated.
std::uint32_t evaluate_pattern(const Assignment& sigma, const Clause& clause);

// Restriction of a clause to a nonempty position set given in increasing
// order (0-based positions).
Clause restrict_clause(const Clause& clause, const std::vector<std::int32_t>& positions);

// Validation helper: distinct variables, all in [0, n).
bool clause_is_valid(const Clause& clause, std::int32_t n);

}  // namespace plantedcsp
