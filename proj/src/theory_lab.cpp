#include "plantedcsp/theory_lab.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <stdexcept>
#include <unordered_set>

namespace plantedcsp {

namespace {

void check_enumeration(std::uint64_t size) {
    if (size > kEnumerationGuard)
        throw std::invalid_argument("tuple space too large for exhaustive evaluation");
}

double chi(const Assignment& sigma, const std::vector<std::int32_t>& vars) {
    double prod = 1.0;
    for (const std::int32_t v : vars) prod *= static_cast<double>(sigma[static_cast<std::size_t>(v)]);
    return prod;
}

// sigma-parity of a variable tuple: product of sigma over its entries, which
// equals (-1)^{#TRUE} for the all-positive-literal reading of the tuple.
std::int8_t tuple_parity(const Assignment& sigma, const std::vector<std::int32_t>& vars) {
    int prod = 1;
    for (const std::int32_t v : vars) prod *= sigma[static_cast<std::size_t>(v)];
    return static_cast<std::int8_t>(prod);
}

std::uint32_t positive_pattern(const Assignment& sigma, const std::vector<std::int32_t>& vars) {
    std::uint32_t y = 0;
    for (std::size_t i = 0; i < vars.size(); ++i)
        if (sigma[static_cast<std::size_t>(vars[i])] == -1) y |= (1u << i);
    return y;
}

std::vector<double> pascal_row_table(std::int32_t n) {
    // binom[a][b] for 0 <= b <= a <= n, flattened.
    std::vector<double> binom(static_cast<std::size_t>((n + 1) * (n + 2) / 2), 0.0);
    auto at = [](std::int32_t a, std::int32_t b) -> std::size_t {
        return static_cast<std::size_t>(a * (a + 1) / 2 + b);
    };
    for (std::int32_t a = 0; a <= n; ++a) {
        binom[at(a, 0)] = 1.0;
        for (std::int32_t b = 1; b <= a; ++b)
            binom[at(a, b)] = binom[at(a - 1, b - 1)] + (b <= a - 1 ? binom[at(a - 1, b)] : 0.0);
    }
    return binom;
}

double binom_at(const std::vector<double>& table, std::int32_t a, std::int32_t b) {
    if (b < 0 || b > a || a < 0) return 0.0;
    return table[static_cast<std::size_t>(a * (a + 1) / 2 + b)];
}

// Per-cardinality energy of the centered relative density: sum over |S| = s of
// (2^k Qhat(S))^2.
std::vector<double> subset_energy(const ClauseDistribution& q) {
    const std::int32_t k = q.k();
    std::vector<double> energy(static_cast<std::size_t>(k) + 1, 0.0);
    for (std::uint32_t mask = 1; mask < (1u << k); ++mask) {
        const double c = std::ldexp(q.fourier_coefficient(mask), k);
        energy[static_cast<std::size_t>(std::popcount(mask))] += c * c;
    }
    return energy;
}

}  // namespace

QueryVector QueryVector::zero(std::int32_t n, std::int32_t ell) {
    QueryVector h;
    h.n = n;
    h.ell = ell;
    h.values.assign(count_tuples(n, ell), 0.0);
    return h;
}

QueryVector QueryVector::random(std::int32_t n, std::int32_t ell, Rng& rng) {
    QueryVector h = zero(n, ell);
    for (double& v : h.values) v = 2.0 * rng.uniform01() - 1.0;
    return h;
}

LabeledQueryVector LabeledQueryVector::zero(std::int32_t n, std::int32_t ell) {
    LabeledQueryVector h;
    h.n = n;
    h.ell = ell;
    h.values.assign(2 * count_var_tuples(n, ell), 0.0);
    return h;
}

LabeledQueryVector LabeledQueryVector::random(std::int32_t n, std::int32_t ell, Rng& rng) {
    LabeledQueryVector h = zero(n, ell);
    for (double& v : h.values) v = 2.0 * rng.uniform01() - 1.0;
    return h;
}

QueryVector density_deviation(const Assignment& sigma, std::int32_t ell) {
    const auto n = static_cast<std::int32_t>(sigma.size());
    QueryVector dev = QueryVector::zero(n, ell);
    check_enumeration(dev.values.size());
    const TupleIndexer indexer(n, ell);
    const double unit = 1.0 / static_cast<double>(indexer.size());
    for (std::uint64_t idx = 0; idx < indexer.size(); ++idx) {
        const int trues = std::popcount(evaluate_pattern(sigma, indexer.unindex(idx)));
        dev.values[idx] = (trues % 2 == 1) ? unit : -unit;
    }
    return dev;
}

double delta(const ClauseDistribution& q, const Assignment& sigma, const QueryVector& h) {
    if (h.ell != q.k()) throw std::invalid_argument("query arity does not match distribution");
    if (static_cast<std::size_t>(h.n) != sigma.size())
        throw std::invalid_argument("assignment length does not match query");
    check_enumeration(count_tuples(h.n, h.ell));
    const TupleIndexer indexer(h.n, h.ell);
    double planted = 0.0;
    double uniform = 0.0;
    for (std::uint64_t idx = 0; idx < indexer.size(); ++idx) {
        const Clause clause = indexer.unindex(idx);
        planted += q.weight(evaluate_pattern(sigma, clause)) * h.values[idx];
        uniform += h.values[idx];
    }
    const double size = static_cast<double>(indexer.size());
    return (std::ldexp(planted, q.k()) - uniform) / size;
}

double delta_goldreich(const Predicate& p, const Assignment& sigma, const LabeledQueryVector& h) {
    if (h.ell != p.k()) throw std::invalid_argument("query arity does not match predicate");
    if (static_cast<std::size_t>(h.n) != sigma.size())
        throw std::invalid_argument("assignment length does not match query");
    check_enumeration(count_var_tuples(h.n, h.ell));
    const VarTupleIndexer indexer(h.n, h.ell);
    double planted = 0.0;
    double uniform = 0.0;
    for (std::uint64_t idx = 0; idx < indexer.size(); ++idx) {
        const std::vector<std::int32_t> vars = indexer.unindex(idx);
        const std::int8_t label = p.value(positive_pattern(sigma, vars)) ? 1 : -1;
        planted += h.at(idx, label);
        uniform += 0.5 * (h.at(idx, 1) + h.at(idx, -1));
    }
    return (planted - uniform) / static_cast<double>(indexer.size());
}

double gamma_expectation(const Assignment& sigma, const QueryVector& g) {
    if (static_cast<std::size_t>(g.n) != sigma.size())
        throw std::invalid_argument("assignment length does not match query");
    check_enumeration(count_tuples(g.n, g.ell));
    const TupleIndexer indexer(g.n, g.ell);
    double odd_mean = 0.0;
    double uniform = 0.0;
    for (std::uint64_t idx = 0; idx < indexer.size(); ++idx) {
        const int trues = std::popcount(evaluate_pattern(sigma, indexer.unindex(idx)));
        if (trues % 2 == 1) odd_mean += 2.0 * g.values[idx];
        uniform += g.values[idx];
    }
    return (odd_mean - uniform) / static_cast<double>(indexer.size());
}

double gamma_polynomial(const Assignment& sigma, const QueryVector& g) {
    if (static_cast<std::size_t>(g.n) != sigma.size())
        throw std::invalid_argument("assignment length does not match query");
    check_enumeration(count_tuples(g.n, g.ell));
    const TupleIndexer indexer(g.n, g.ell);
    std::map<std::vector<std::int32_t>, double> coeff;
    for (std::uint64_t idx = 0; idx < indexer.size(); ++idx) {
        const Clause clause = indexer.unindex(idx);
        std::vector<std::int32_t> key(clause.size());
        int negations = 0;
        for (std::size_t i = 0; i < clause.size(); ++i) {
            key[i] = clause[i].variable;
            negations += clause[i].negated ? 1 : 0;
        }
        std::sort(key.begin(), key.end());
        coeff[std::move(key)] += (negations % 2 == 0) ? g.values[idx] : -g.values[idx];
    }
    double total = 0.0;
    for (const auto& [vars, c] : coeff) total += c * chi(sigma, vars);
    return -total / static_cast<double>(indexer.size());
}

double gamma_labeled(const Assignment& sigma, const LabeledQueryVector& g) {
    if (static_cast<std::size_t>(g.n) != sigma.size())
        throw std::invalid_argument("assignment length does not match query");
    check_enumeration(count_var_tuples(g.n, g.ell));
    const VarTupleIndexer indexer(g.n, g.ell);
    double matched = 0.0;
    double uniform = 0.0;
    for (std::uint64_t idx = 0; idx < indexer.size(); ++idx) {
        const std::vector<std::int32_t> vars = indexer.unindex(idx);
        matched += g.at(idx, tuple_parity(sigma, vars));
        uniform += 0.5 * (g.at(idx, 1) + g.at(idx, -1));
    }
    return (matched - uniform) / static_cast<double>(indexer.size());
}

QueryVector project_query(const QueryVector& h, const std::vector<std::int32_t>& positions) {
    const auto ell = static_cast<std::int32_t>(positions.size());
    if (ell < 1 || ell > h.ell) throw std::invalid_argument("bad projection position set");
    check_enumeration(count_tuples(h.n, h.ell));
    const TupleIndexer source(h.n, h.ell);
    const TupleIndexer target(h.n, ell);
    QueryVector out = QueryVector::zero(h.n, ell);
    for (std::uint64_t idx = 0; idx < source.size(); ++idx) {
        const Clause clause = source.unindex(idx);
        out.values[target.index(restrict_clause(clause, positions))] += h.values[idx];
    }
    const double scale = static_cast<double>(target.size()) / static_cast<double>(source.size());
    for (double& v : out.values) v *= scale;
    return out;
}

LabeledQueryVector project_labeled(const LabeledQueryVector& h,
                                   const std::vector<std::int32_t>& positions) {
    const auto ell = static_cast<std::int32_t>(positions.size());
    if (ell > h.ell) throw std::invalid_argument("bad projection position set");
    check_enumeration(count_var_tuples(h.n, h.ell));
    const VarTupleIndexer source(h.n, h.ell);
    const VarTupleIndexer target(h.n, ell);
    LabeledQueryVector out = LabeledQueryVector::zero(h.n, ell);
    for (std::uint64_t idx = 0; idx < source.size(); ++idx) {
        const std::vector<std::int32_t> vars = source.unindex(idx);
        std::vector<std::int32_t> sub;
        sub.reserve(positions.size());
        std::int32_t prev = -1;
        for (const std::int32_t pos : positions) {
            if (pos <= prev || pos >= h.ell) throw std::invalid_argument("bad projection position set");
            sub.push_back(vars[static_cast<std::size_t>(pos)]);
            prev = pos;
        }
        const std::uint64_t t = target.index(sub);
        out.values[2 * t] += h.values[2 * idx];
        out.values[2 * t + 1] += h.values[2 * idx + 1];
    }
    const double scale = static_cast<double>(target.size()) / static_cast<double>(source.size());
    for (double& v : out.values) v *= scale;
    return out;
}

DecompositionCheck check_decomposition(const ClauseDistribution& q, const Assignment& sigma,
                                       const QueryVector& h) {
    DecompositionCheck check;
    check.lhs = delta(q, sigma, h);
    double rhs = 0.0;
    for (std::uint32_t mask = 1; mask < (1u << q.k()); ++mask) {
        const QueryVector h_s = project_query(h, mask_to_positions(mask));
        rhs += q.fourier_coefficient(mask) * gamma_expectation(sigma, h_s);
    }
    check.rhs = -std::ldexp(rhs, q.k());
    check.residual = std::fabs(check.lhs - check.rhs);
    return check;
}

DecompositionCheck check_decomposition_goldreich(const Predicate& p, const Assignment& sigma,
                                                 const LabeledQueryVector& h) {
    DecompositionCheck check;
    check.lhs = delta_goldreich(p, sigma, h);
    double rhs = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << p.k()); ++mask) {
        // Fourier coefficient of the +-1-valued predicate.
        const double phat =
            2.0 * p.fourier_coefficient(mask) - (mask == 0 ? 1.0 : 0.0);
        const LabeledQueryVector h_s = project_labeled(h, mask_to_positions(mask));
        rhs += phat * gamma_labeled(sigma, h_s);
    }
    check.rhs = rhs;
    check.residual = std::fabs(check.lhs - check.rhs);
    return check;
}

namespace {

// E[chi_S(z) | a agreements] for |S| = s: the mean of (-1)^{#disagreeing vars
// drawn} over s distinct uniform draws from a population with n - a
// disagreements.
double hypergeometric_sign_mean(const std::vector<double>& binom, std::int32_t n, std::int32_t a,
                                std::int32_t s) {
    double total = 0.0;
    for (std::int32_t j = 0; j <= s; ++j) {
        const double ways = binom_at(binom, n - a, j) * binom_at(binom, a, s - j);
        total += (j % 2 == 0) ? ways : -ways;
    }
    return total / binom_at(binom, n, s);
}

std::vector<double> correlation_profile(const ClauseDistribution& q, std::int32_t n) {
    const std::int32_t k = q.k();
    if (k > n) throw std::invalid_argument("clause arity exceeds variable count");
    const std::vector<double> binom = pascal_row_table(n);
    const std::vector<double> energy = subset_energy(q);
    std::vector<double> profile(static_cast<std::size_t>(n) + 1, 0.0);
    for (std::int32_t a = 0; a <= n; ++a) {
        double g = 0.0;
        for (std::int32_t s = 1; s <= k; ++s)
            g += energy[static_cast<std::size_t>(s)] * hypergeometric_sign_mean(binom, n, a, s);
        profile[static_cast<std::size_t>(a)] = g;
    }
    return profile;
}

std::int32_t agreement_count(const Assignment& a, const Assignment& b) {
    std::int32_t count = 0;
    for (std::size_t v = 0; v < a.size(); ++v)
        if (a[v] == b[v]) ++count;
    return count;
}

}  // namespace

double pair_correlation(const ClauseDistribution& q, std::int32_t n, std::int32_t agreements) {
    if (agreements < 0 || agreements > n) throw std::invalid_argument("bad agreement count");
    return correlation_profile(q, n)[static_cast<std::size_t>(agreements)];
}

double discrimination_norm(const ClauseDistribution& q, std::int32_t n,
                           const std::vector<Assignment>& sigmas) {
    const auto m = static_cast<std::int32_t>(sigmas.size());
    if (m < 1) throw std::invalid_argument("family must be nonempty");
    if (m > kGrayCodeCap) throw std::invalid_argument("family too large for the sign-vector walk");
    for (const Assignment& s : sigmas)
        if (static_cast<std::int32_t>(s.size()) != n)
            throw std::invalid_argument("assignment length mismatch");

    const std::vector<double> profile = correlation_profile(q, n);
    std::vector<double> gram(static_cast<std::size_t>(m) * static_cast<std::size_t>(m));
    for (std::int32_t i = 0; i < m; ++i)
        for (std::int32_t j = 0; j < m; ++j)
            gram[static_cast<std::size_t>(i) * m + j] =
                profile[static_cast<std::size_t>(agreement_count(sigmas[i], sigmas[j]))];

    // eps^T G eps over sign vectors, Gray-code walk with eps_0 fixed to +1.
    std::vector<double> eps(static_cast<std::size_t>(m), 1.0);
    std::vector<double> v(static_cast<std::size_t>(m), 0.0);
    double obj = 0.0;
    for (std::int32_t i = 0; i < m; ++i) {
        for (std::int32_t j = 0; j < m; ++j) v[i] += gram[static_cast<std::size_t>(i) * m + j];
        obj += v[static_cast<std::size_t>(i)];
    }
    double best = obj;
    const std::uint64_t steps = (m > 1) ? (std::uint64_t{1} << (m - 1)) : 1;
    for (std::uint64_t step = 1; step < steps; ++step) {
        const std::int32_t j = std::countr_zero(step) + 1;  // index 0 never flips
        const double ej = eps[static_cast<std::size_t>(j)];
        obj += -4.0 * ej * v[static_cast<std::size_t>(j)] +
               4.0 * gram[static_cast<std::size_t>(j) * m + j];
        for (std::int32_t i = 0; i < m; ++i)
            v[static_cast<std::size_t>(i)] -= 2.0 * ej * gram[static_cast<std::size_t>(i) * m + j];
        eps[static_cast<std::size_t>(j)] = -ej;
        best = std::max(best, obj);
    }
    return std::sqrt(std::max(best, 0.0)) / static_cast<double>(m);
}

double discrimination_norm_full(const ClauseDistribution& q, std::int32_t n) {
    if (n < 1 || n > 48) throw std::invalid_argument("full-family route needs 1 <= n <= 48");
    const std::vector<double> profile = correlation_profile(q, n);
    const std::vector<double> binom = pascal_row_table(n);

    // Eigenvalue of the agreement-profile matrix on the weight-t character
    // space: sum over flip-distance d of profile(n - d) * K_t(d).
    double lambda_max = 0.0;
    for (std::int32_t t = 0; t <= n; ++t) {
        double lambda = 0.0;
        for (std::int32_t d = 0; d <= n; ++d) {
            double kraw = 0.0;
            for (std::int32_t j = 0; j <= std::min(t, d); ++j) {
                const double ways = binom_at(binom, t, j) * binom_at(binom, n - t, d - j);
                kraw += (j % 2 == 0) ? ways : -ways;
            }
            lambda += profile[static_cast<std::size_t>(n - d)] * kraw;
        }
        lambda_max = std::max(lambda_max, lambda);
    }
    const double family = std::ldexp(1.0, n);
    return std::sqrt(std::max(lambda_max, 0.0) / family);
}

double discrimination_norm_enumerated(const ClauseDistribution& q, std::int32_t n,
                                      const std::vector<Assignment>& sigmas) {
    const auto m = static_cast<std::int32_t>(sigmas.size());
    if (m < 1 || m > kEnumeratedCap)
        throw std::invalid_argument("reference route supports 1 <= m <= 8");
    const std::int32_t k = q.k();
    check_enumeration(count_tuples(n, k));
    const TupleIndexer indexer(n, k);

    std::vector<std::vector<double>> dev(static_cast<std::size_t>(m));
    for (std::int32_t i = 0; i < m; ++i) {
        dev[static_cast<std::size_t>(i)].resize(indexer.size());
        for (std::uint64_t idx = 0; idx < indexer.size(); ++idx) {
            const Clause clause = indexer.unindex(idx);
            const double w = q.weight(evaluate_pattern(sigmas[static_cast<std::size_t>(i)], clause));
            dev[static_cast<std::size_t>(i)][idx] = std::ldexp(w, k) - 1.0;
        }
    }

    double best = 0.0;
    const std::uint64_t patterns = std::uint64_t{1} << (m - 1);
    for (std::uint64_t bits = 0; bits < patterns; ++bits) {
        double norm2 = 0.0;
        for (std::uint64_t idx = 0; idx < indexer.size(); ++idx) {
            double f = dev[0][idx];  // eps_0 = +1
            for (std::int32_t i = 1; i < m; ++i) {
                const double e = ((bits >> (i - 1)) & 1) ? -1.0 : 1.0;
                f += e * dev[static_cast<std::size_t>(i)][idx];
            }
            norm2 += f * f;
        }
        best = std::max(best, norm2 / static_cast<double>(indexer.size()));
    }
    return std::sqrt(best) / static_cast<double>(m);
}

SdnReport sdn_probe(const ClauseDistribution& q_dist, std::int32_t n, double kappa,
                    const std::vector<std::uint64_t>& q_grid, std::int32_t trials, Rng& rng) {
    if (n < 1 || n > 62) throw std::invalid_argument("probe needs 1 <= n <= 62");
    if (trials < 1) throw std::invalid_argument("probe needs at least one trial per divisor");
    const std::uint64_t family = std::uint64_t{1} << n;

    SdnReport report;
    report.kappa = kappa;
    for (const std::uint64_t q : q_grid) {
        if (q == 0) throw std::invalid_argument("divisor must be positive");
        SdnRow row;
        row.q = q;
        row.subset_size = std::max<std::uint64_t>(1, (family + q - 1) / q);
        if (q == 1) {
            row.max_kappa2 = discrimination_norm_full(q_dist, n);
        } else if (row.subset_size <= static_cast<std::uint64_t>(kGrayCodeCap)) {
            double worst = 0.0;
            for (std::int32_t trial = 0; trial < trials; ++trial) {
                std::unordered_set<std::uint64_t> picked;
                std::vector<Assignment> sigmas;
                while (sigmas.size() < row.subset_size) {
                    const std::uint64_t code = rng.below(family);
                    if (!picked.insert(code).second) continue;
                    Assignment sigma(static_cast<std::size_t>(n));
                    for (std::int32_t v = 0; v < n; ++v)
                        sigma[static_cast<std::size_t>(v)] = ((code >> v) & 1) ? -1 : 1;
                    sigmas.push_back(std::move(sigma));
                }
                worst = std::max(worst, discrimination_norm(q_dist, n, sigmas));
            }
            row.max_kappa2 = worst;
        } else {
            continue;  // untestable size; the probe stays one-sided
        }
        row.pass = row.max_kappa2 <= kappa;
        if (row.pass) report.largest_passing_q = std::max(report.largest_passing_q, row.q);
        report.rows.push_back(row);
    }
    return report;
}

}  // namespace plantedcsp
