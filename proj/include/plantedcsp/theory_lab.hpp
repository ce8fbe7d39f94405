#pragma once

// Brute-force laboratory for the structural identities behind the recovery
// algorithm, sized for exhaustive verification on small instances:
//
//   * density deviations of planted clause laws against the uniform law,
//   * the projection of a clause query onto a position subset,
//   * the decomposition of a query's planted-vs-uniform advantage into
//     per-subset parity advantages weighted by Fourier coefficients
//     (clause-distribution and labeled-predicate forms),
//   * pairwise-correlation norms of planted-family deviations and a
//     one-sided probe of how large a family subset stays below a norm bound.
//
// Everything here enumerates tuple spaces directly and is guarded by
// kEnumerationGuard; nothing is sampled unless a function takes an Rng.

#include <cstdint>
#include <vector>

#include "plantedcsp/clause_space.hpp"
#include "plantedcsp/distribution.hpp"
#include "plantedcsp/oracles.hpp"
#include "plantedcsp/rng.hpp"

namespace plantedcsp {

// Real-valued query on ordered literal ell-tuples, stored densely in
// TupleIndexer order.
struct QueryVector {
    std::int32_t n = 0;
    std::int32_t ell = 0;
    std::vector<double> values;

    static QueryVector zero(std::int32_t n, std::int32_t ell);
    static QueryVector random(std::int32_t n, std::int32_t ell, Rng& rng);  // iid uniform [-1,1]
};

// Real-valued query on labeled variable ell-tuples (T, b), b in {+1,-1};
// flat index = 2 * VarTupleIndexer::index(T) + (b == -1). ell = 0 is the
// two-point space {(+1), (-1)}.
struct LabeledQueryVector {
    std::int32_t n = 0;
    std::int32_t ell = 0;
    std::vector<double> values;

    static LabeledQueryVector zero(std::int32_t n, std::int32_t ell);
    static LabeledQueryVector random(std::int32_t n, std::int32_t ell, Rng& rng);

    double at(std::uint64_t tuple_index, std::int8_t label) const {
        return values[2 * tuple_index + (label == -1 ? 1 : 0)];
    }
};

// Density of the uniform-on-odd-#TRUE law minus the uniform density, per
// tuple: -(-1)^{#TRUE(C under sigma)} / |X_ell|.
QueryVector density_deviation(const Assignment& sigma, std::int32_t ell);

// E_{Q_sigma}[h] - E_{U_k}[h] for a query over full k-clauses.
double delta(const ClauseDistribution& q, const Assignment& sigma, const QueryVector& h);

// Labeled analog for a planted predicate: E over (T, b(T)) with T uniform and
// b the predicate value on sigma restricted to T, minus E over uniform (T, b).
double delta_goldreich(const Predicate& p, const Assignment& sigma, const LabeledQueryVector& h);

// Parity advantage of a query over ell-tuples: the expectation of g under the
// uniform-on-odd-#TRUE law minus its uniform expectation. Two independent
// evaluation routes that must agree:
double gamma_expectation(const Assignment& sigma, const QueryVector& g);
// ... and the character-sum form -(1/|X_ell|) sum_A chi_A(sigma) *
// sum_{V(C)=A} g(C) (-1)^{#negations(C)}, grouped by variable set A.
double gamma_polynomial(const Assignment& sigma, const QueryVector& g);

// Labeled analog: expectation under the law that pairs a uniform tuple with
// the label equal to its sigma-parity, minus the fully uniform expectation.
// For ell = 0 this reduces to (g(+1) - g(-1)) / 2.
double gamma_labeled(const Assignment& sigma, const LabeledQueryVector& g);

// h_S(C_ell) = (|X_ell| / |X_k|) * sum over k-clauses restricting to C_ell on
// the position set S (ascending, 0-based).
QueryVector project_query(const QueryVector& h, const std::vector<std::int32_t>& positions);

// Labeled projection: the label rides along unchanged. positions may be empty
// (projection onto the bare label).
LabeledQueryVector project_labeled(const LabeledQueryVector& h,
                                   const std::vector<std::int32_t>& positions);

struct DecompositionCheck {
    double lhs = 0.0;       // delta
    double rhs = 0.0;       // Fourier-weighted sum of projected parity advantages
    double residual = 0.0;  // |lhs - rhs|
};

// delta(sigma, h) = -2^k sum_{S nonempty} Qhat(S) gamma_{|S|}(sigma, h_S).
DecompositionCheck check_decomposition(const ClauseDistribution& q, const Assignment& sigma,
                                       const QueryVector& h);

// delta'(sigma, h) = sum_{S, including empty} Phat(S) gamma'_{|S|}(sigma, h_S)
// with Phat the Fourier coefficients of the +-1-valued predicate.
DecompositionCheck check_decomposition_goldreich(const Predicate& p, const Assignment& sigma,
                                                 const LabeledQueryVector& h);

// --- pairwise-correlation norm of planted deviations ---------------------

inline constexpr std::int32_t kGrayCodeCap = 22;   // subset route: 2^(m-1) sign patterns
inline constexpr std::int32_t kEnumeratedCap = 8;  // reference route over full clause space

// E_{C~U}[d_sigma(C) d_tau(C)] where d_sigma = Q_sigma/U - 1, as a function of
// the number of variables on which the two assignments agree.
double pair_correlation(const ClauseDistribution& q, std::int32_t n, std::int32_t agreements);

// (1/m) max over sign vectors eps of || sum_i eps_i d_{sigma_i} ||_{U_k},
// computed from the pairwise Gram matrix with a Gray-code walk over sign
// vectors (m <= kGrayCodeCap).
double discrimination_norm(const ClauseDistribution& q, std::int32_t n,
                           const std::vector<Assignment>& sigmas);

// The same norm for the full 2^n family, exactly: the Gram matrix lies in the
// Hamming association scheme, whose eigenvectors are +-1-valued characters, so
// the sign-vector maximum equals 2^n times the largest eigenvalue.
double discrimination_norm_full(const ClauseDistribution& q, std::int32_t n);

// Independent reference for tiny families (m <= kEnumeratedCap): enumerates
// every sign vector and evaluates || sum eps_i d_i || directly over the clause
// space, without the Gram matrix shortcut.
double discrimination_norm_enumerated(const ClauseDistribution& q, std::int32_t n,
                                      const std::vector<Assignment>& sigmas);

// --- one-sided probe of the norm profile ----------------------------------

struct SdnRow {
    std::uint64_t q = 0;            // family-size divisor being tested
    std::uint64_t subset_size = 0;  // ceil(2^n / q)
    double max_kappa2 = 0.0;        // worst norm over the tested subsets
    bool pass = false;              // max_kappa2 <= kappa
};

struct SdnReport {
    double kappa = 0.0;
    std::vector<SdnRow> rows;
    std::uint64_t largest_passing_q = 0;  // 0 when nothing passed
};

// For each divisor q in the grid, draws `trials` uniform subsets of the full
// assignment family of size ceil(2^n / q) and checks whether every subset has
// discrimination norm <= kappa. q = 1 uses the exact full-family route; grid
// entries whose subset size exceeds kGrayCodeCap are skipped (the probe is
// one-sided and only reports what it actually tested).
SdnReport sdn_probe(const ClauseDistribution& q_dist, std::int32_t n, double kappa,
                    const std::vector<std::uint64_t>& q_grid, std::int32_t trials, Rng& rng);

}  // namespace plantedcsp
