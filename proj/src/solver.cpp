#include "plantedcsp/solver.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <memory>

#include <json.hpp>

namespace plantedcsp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double sum_of(const std::vector<double>& x) {
    double s = 0.0;
    for (const double v : x) s += v;
    return s;
}

std::int32_t default_rounds(double geometric_size) {
    const double lg = std::log2(std::max(geometric_size, 2.0));
    return std::max<std::int32_t>(1, static_cast<std::int32_t>(std::ceil(lg)));
}

}  // namespace

BipartiteShape::BipartiteShape(std::int32_t n, std::int32_t r, std::uint64_t memory_cap_entries)
    : n(n),
      r(r),
      row_ell((r + 1) / 2),
      col_ell(r / 2),
      rows(count_tuples(n, (r + 1) / 2)),
      cols(count_tuples(n, r / 2)),
      row_indexer(n, (r + 1) / 2),
      col_indexer(n, r / 2) {
    if (r < 1) throw std::invalid_argument("bipartite shape needs r >= 1");
    if (rows > memory_cap_entries || cols > memory_cap_entries) {
        const std::uint64_t bytes = (rows + cols) * sizeof(double);
        throw MemoryCapError("iterate vectors need " + std::to_string(bytes) +
                             " bytes, above the configured entry cap of " +
                             std::to_string(memory_cap_entries) + " entries per side");
    }
    geometric_size = std::sqrt(static_cast<double>(rows) * static_cast<double>(cols));
}

std::pair<std::uint64_t, std::uint64_t> BipartiteShape::entry(const Clause& r_clause) const {
    if (static_cast<std::int32_t>(r_clause.size()) != r)
        throw std::invalid_argument("clause arity does not match bipartite shape");
    Clause head(r_clause.begin(), r_clause.begin() + row_ell);
    Clause tail(r_clause.begin() + row_ell, r_clause.end());
    return {row_indexer.index(head), col_indexer.index(tail)};
}

std::vector<std::int8_t> truth_vector(const Assignment& sigma, const TupleIndexer& indexer) {
    std::vector<std::int8_t> u(indexer.size());
    for (std::uint64_t idx = 0; idx < indexer.size(); ++idx) {
        const Clause clause = indexer.unindex(idx);
        const int trues = std::popcount(evaluate_pattern(sigma, clause));
        u[idx] = (trues % 2 == 0) ? std::int8_t{1} : std::int8_t{-1};
    }
    return u;
}

std::vector<double> formula_multiply(const Formula& r_clauses, const BipartiteShape& shape,
                                     const std::vector<double>& x, bool transpose) {
    const std::uint64_t in_size = transpose ? shape.rows : shape.cols;
    const std::uint64_t out_size = transpose ? shape.cols : shape.rows;
    if (x.size() != in_size) throw std::invalid_argument("vector length does not match shape");
    std::vector<double> out(out_size, 0.0);
    for (const Clause& clause : r_clauses) {
        const auto [row, col] = shape.entry(clause);
        if (transpose)
            out[col] += x[row];
        else
            out[row] += x[col];
    }
    return out;
}

std::vector<double> randomized_round(const std::vector<double>& z, Rng& rng) {
    double max_abs = 0.0;
    for (const double v : z) max_abs = std::max(max_abs, std::fabs(v));
    std::vector<double> x(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) {
        const double lean = max_abs > 0.0 ? z[j] / (2.0 * max_abs) : 0.0;
        x[j] = rng.uniform01() < 0.5 + lean ? 1.0 : -1.0;
    }
    return x;
}

std::vector<double> ternary_round(const std::vector<double>& z) {
    std::vector<double> y(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) y[j] = z[j] > 0.0 ? 1.0 : (z[j] < 0.0 ? -1.0 : 0.0);
    return y;
}

std::vector<std::int8_t> sign_round(const std::vector<double>& z, Rng& rng) {
    std::vector<std::int8_t> u(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) {
        if (z[j] > 0.0)
            u[j] = 1;
        else if (z[j] < 0.0)
            u[j] = -1;
        else
            u[j] = static_cast<std::int8_t>(rng.coin_pm1());
    }
    return u;
}

PowerIterationResult power_iterate(const BipartiteShape& shape, MatVecSource& source,
                                   std::int32_t rounds, Rng& rng) {
    if (rounds < 1) throw std::invalid_argument("power iteration needs at least one round");
    std::vector<double> x(shape.cols);
    for (double& v : x) v = static_cast<double>(rng.coin_pm1());

    PowerIterationResult result;
    result.iterations = rounds;
    if (shape.r % 2 == 0) {
        for (std::int32_t round = 0; round < rounds; ++round) {
            const std::vector<double> z = source.multiply_fresh(x, false, true);
            x = randomized_round(z, rng);
        }
        const std::vector<double> z = source.multiply_fresh(x, false, true);
        result.u_star = sign_round(z, rng);
    } else {
        std::vector<double> z;
        for (std::int32_t round = 0; round < rounds; ++round) {
            const std::vector<double> y = ternary_round(source.multiply_fresh(x, false, false));
            z = source.multiply_fresh(y, true, true);
            if (round + 1 < rounds) x = randomized_round(z, rng);
        }
        result.u_star = sign_round(z, rng);
    }
    return result;
}

namespace {

// GF(2) row over n variable bits plus one right-hand-side bit at position n.
struct Gf2System {
    std::int32_t n;
    std::size_t words;
    std::vector<std::vector<std::uint64_t>> pivot_rows;  // indexed by leading variable
    std::vector<char> has_pivot;
    bool inconsistent = false;

    explicit Gf2System(std::int32_t n)
        : n(n),
          words(static_cast<std::size_t>(n + 1 + 63) / 64),
          pivot_rows(static_cast<std::size_t>(n)),
          has_pivot(static_cast<std::size_t>(n), 0) {}

    static void set_bit(std::vector<std::uint64_t>& row, std::int32_t bit) {
        row[static_cast<std::size_t>(bit) / 64] |= std::uint64_t{1} << (bit % 64);
    }
    static bool get_bit(const std::vector<std::uint64_t>& row, std::int32_t bit) {
        return (row[static_cast<std::size_t>(bit) / 64] >> (bit % 64)) & 1;
    }

    // Lowest set variable bit, ignoring the RHS bit; -1 if none.
    std::int32_t leading_var(const std::vector<std::uint64_t>& row) const {
        for (std::size_t w = 0; w < words; ++w) {
            std::uint64_t word = row[w];
            if (static_cast<std::size_t>(n) / 64 == w) word &= (std::uint64_t{1} << (n % 64)) - 1;
            if (word) return static_cast<std::int32_t>(w * 64 + std::countr_zero(word));
        }
        return -1;
    }

    void add_equation(const std::vector<std::int32_t>& vars, int rhs) {
        std::vector<std::uint64_t> row(words, 0);
        for (const std::int32_t v : vars) set_bit(row, v);
        if (rhs) set_bit(row, n);
        while (true) {
            const std::int32_t lead = leading_var(row);
            if (lead < 0) {
                if (get_bit(row, n)) inconsistent = true;
                return;
            }
            if (!has_pivot[static_cast<std::size_t>(lead)]) {
                pivot_rows[static_cast<std::size_t>(lead)] = std::move(row);
                has_pivot[static_cast<std::size_t>(lead)] = 1;
                return;
            }
            const auto& pivot = pivot_rows[static_cast<std::size_t>(lead)];
            for (std::size_t w = 0; w < words; ++w) row[w] ^= pivot[w];
        }
    }

    std::vector<std::int32_t> free_vars() const {
        std::vector<std::int32_t> out;
        for (std::int32_t v = 0; v < n; ++v)
            if (!has_pivot[static_cast<std::size_t>(v)]) out.push_back(v);
        return out;
    }

    // Back-substitution: pivot rows have their lowest bit at the pivot
    // variable, so solving from the highest variable downward is well-defined.
    Assignment solve(const std::vector<std::int32_t>& free, std::uint64_t free_mask) const {
        std::vector<char> s(static_cast<std::size_t>(n), 0);
        for (std::size_t b = 0; b < free.size(); ++b)
            s[static_cast<std::size_t>(free[b])] = static_cast<char>((free_mask >> b) & 1);
        for (std::int32_t v = n - 1; v >= 0; --v) {
            if (!has_pivot[static_cast<std::size_t>(v)]) continue;
            const auto& row = pivot_rows[static_cast<std::size_t>(v)];
            char val = get_bit(row, n) ? 1 : 0;
            for (std::int32_t w = v + 1; w < n; ++w)
                if (get_bit(row, w)) val = static_cast<char>(val ^ s[static_cast<std::size_t>(w)]);
            s[static_cast<std::size_t>(v)] = val;
        }
        Assignment sigma(static_cast<std::size_t>(n));
        for (std::int32_t v = 0; v < n; ++v)
            sigma[static_cast<std::size_t>(v)] = s[static_cast<std::size_t>(v)] ? -1 : 1;
        return sigma;
    }
};

}  // namespace

DecodeResult parity_decode(const std::vector<std::int8_t>& u_star, const TupleIndexer& indexer,
                           const DecodeOptions& options,
                           const std::vector<std::uint64_t>* coordinates) {
    if (u_star.size() != indexer.size())
        throw std::invalid_argument("truth vector length does not match tuple space");
    const std::int32_t n = indexer.n();
    const std::int32_t ell = indexer.ell();
    if (ell < 1) throw std::invalid_argument("parity decode needs tuples of positive length");

    DecodeResult result;

    // One vote per tuple: sum_{v in set} s_v = b xor (negation parity), where
    // b = 0 for u = +1 (even #TRUE). Votes are pooled per variable set.
    std::map<std::vector<std::int32_t>, std::array<std::uint64_t, 2>> votes;
    auto consider = [&](std::uint64_t idx) {
        const std::int8_t u = u_star[idx];
        if (u == 0) return;
        const Clause clause = indexer.unindex(idx);
        int rhs = (u == 1) ? 0 : 1;
        std::vector<std::int32_t> key(static_cast<std::size_t>(ell));
        for (std::size_t i = 0; i < clause.size(); ++i) {
            key[i] = clause[i].variable;
            rhs ^= clause[i].negated ? 1 : 0;
        }
        std::sort(key.begin(), key.end());
        votes[std::move(key)][static_cast<std::size_t>(rhs)] += 1;
    };
    if (coordinates) {
        for (const std::uint64_t idx : *coordinates) {
            if (idx >= indexer.size()) throw std::out_of_range("decode coordinate out of range");
            consider(idx);
        }
    } else {
        for (std::uint64_t idx = 0; idx < indexer.size(); ++idx) consider(idx);
    }

    Gf2System system(n);
    for (const auto& [key, counts] : votes) {
        const std::uint64_t total = counts[0] + counts[1];
        const int winner = counts[1] > counts[0] ? 1 : 0;
        const std::uint64_t top = std::max(counts[0], counts[1]);
        if (static_cast<double>(top) < options.min_agreement * static_cast<double>(total)) {
            ++result.dropped_var_sets;
            continue;
        }
        system.add_equation(key, winner);
        ++result.equations;
    }

    if (system.inconsistent) {
        result.failure_reason = "inconsistent parity equations";
        return result;
    }
    const std::vector<std::int32_t> free = system.free_vars();
    if (static_cast<std::int32_t>(free.size()) > options.max_free_vars) {
        result.failure_reason = "underdetermined parity system: " + std::to_string(free.size()) +
                                " free variables exceed the enumeration cap of " +
                                std::to_string(options.max_free_vars);
        return result;
    }

    const std::uint64_t combos = std::uint64_t{1} << free.size();
    result.solutions.reserve(combos);
    for (std::uint64_t mask = 0; mask < combos; ++mask)
        result.solutions.push_back(system.solve(free, mask));
    result.success = true;
    return result;
}

namespace {

std::vector<Assignment> dedupe_candidates(const std::vector<Assignment>& candidates) {
    std::vector<Assignment> uniq;
    for (const Assignment& c : candidates) {
        if (std::find(uniq.begin(), uniq.end(), c) == uniq.end()) uniq.push_back(c);
    }
    return uniq;
}

Disambiguation pick_from_scores(std::vector<Assignment> uniq, const std::vector<double>& scores,
                                std::uint64_t heldout_size, std::int32_t k) {
    Disambiguation out;
    out.best_score = kNegInf;
    if (uniq.empty()) return out;
    for (const double s : scores) out.best_score = std::max(out.best_score, s);
    for (std::size_t i = 0; i < uniq.size(); ++i) {
        if (scores[i] == out.best_score) out.tie_class.push_back(std::move(uniq[i]));
    }
    if (heldout_size > 0 && std::isfinite(out.best_score)) {
        out.llr_per_clause = out.best_score / static_cast<double>(heldout_size) +
                             static_cast<double>(k) * std::log(2.0);
    } else if (!std::isfinite(out.best_score)) {
        out.llr_per_clause = kNegInf;
    }
    return out;
}

double heldout_score(const ClauseDistribution& q, const Assignment& candidate,
                     const Formula& heldout) {
    double score = 0.0;
    for (const Clause& clause : heldout) {
        const double w = q.weight(evaluate_pattern(candidate, clause));
        if (w <= 0.0) return kNegInf;
        score += std::log(w);
    }
    return score;
}

}  // namespace

Disambiguation disambiguate(const ClauseDistribution& q, const std::vector<Assignment>& candidates,
                            const Formula& heldout_k_clauses) {
    std::vector<Assignment> uniq = dedupe_candidates(candidates);
    std::vector<double> scores;
    scores.reserve(uniq.size());
    for (const Assignment& c : uniq) scores.push_back(heldout_score(q, c, heldout_k_clauses));
    return pick_from_scores(std::move(uniq), scores, heldout_k_clauses.size(), q.k());
}

namespace {

// Fresh-formula multiplies fed by a clause stream; every k-clause is
// restricted to the channel witness before it contributes an entry.
class DirectMatVec final : public MatVecSource {
public:
    DirectMatVec(ClauseStream& stream, const ParityChannel& channel, const BipartiteShape& shape,
                 std::uint64_t m_round, std::uint64_t x_r_size, std::uint64_t& consumed)
        : stream_(stream),
          channel_(channel),
          shape_(shape),
          m_round_(m_round),
          x_r_size_(x_r_size),
          consumed_(consumed) {}

    std::vector<double> multiply_fresh(const std::vector<double>& x, bool transpose,
                                       bool centered) override {
        const std::uint64_t out_size = transpose ? shape_.cols : shape_.rows;
        std::vector<double> out(out_size, 0.0);
        for (std::uint64_t i = 0; i < m_round_; ++i) {
            const Clause r_clause = channel_.restrict(stream_.next());
            const auto [row, col] = shape_.entry(r_clause);
            if (transpose)
                out[col] += x[row];
            else
                out[row] += x[col];
        }
        consumed_ += m_round_;
        if (centered) {
            const double shift =
                (static_cast<double>(m_round_) / static_cast<double>(x_r_size_)) * sum_of(x);
            for (double& v : out) v -= shift;
        }
        return out;
    }

private:
    ClauseStream& stream_;
    const ParityChannel& channel_;
    const BipartiteShape& shape_;
    std::uint64_t m_round_;
    std::uint64_t x_r_size_;
    std::uint64_t& consumed_;
};

// The same multiplies through 1-MSTAT queries. Per multiply the session's
// stream is marked, one query pass tallies rows whose clause lands on a +1
// input coordinate, the stream is rewound, and a second pass tallies -1
// coordinates over the identical samples; the count difference is exactly the
// streamed matrix-vector product the direct path computes.
class OracleMatVec final : public MatVecSource {
public:
    OracleMatVec(OracleSession<Clause>& session, const ParityChannel& channel,
                 const BipartiteShape& shape, std::uint64_t m_round, std::uint64_t x_r_size)
        : session_(session),
          channel_(channel),
          shape_(shape),
          m_round_(m_round),
          x_r_size_(x_r_size) {}

    std::vector<double> multiply_fresh(const std::vector<double>& x, bool transpose,
                                       bool centered) override {
        const std::uint64_t out_size = transpose ? shape_.cols : shape_.rows;
        if (out_size + 1 > static_cast<std::uint64_t>(std::numeric_limits<std::int32_t>::max()))
            throw std::invalid_argument("tuple space too large for 1-MSTAT value range");
        const auto L = static_cast<std::int32_t>(out_size + 1);

        auto make_query = [&](bool positive) {
            return QueryFunction<Clause>{L, [this, &x, transpose, positive](const Clause& kc) {
                const auto [row, col] = shape_.entry(channel_.restrict(kc));
                const std::uint64_t in_idx = transpose ? row : col;
                const std::uint64_t out_idx = transpose ? col : row;
                const bool hit = positive ? x[in_idx] > 0.5 : x[in_idx] < -0.5;
                return hit ? static_cast<std::int32_t>(out_idx + 1) : 0;
            }};
        };

        std::vector<double> out(out_size, 0.0);
        const QueryFunction<Clause> h_plus = make_query(true);
        const QueryFunction<Clause> h_minus = make_query(false);
        session_.stream().mark();
        for (std::uint64_t i = 0; i < m_round_; ++i) {
            const std::int32_t v = session_.query_1mstat(h_plus);
            if (v > 0) out[static_cast<std::uint64_t>(v) - 1] += 1.0;
        }
        session_.stream().rewind();
        for (std::uint64_t i = 0; i < m_round_; ++i) {
            const std::int32_t v = session_.query_1mstat(h_minus);
            if (v > 0) out[static_cast<std::uint64_t>(v) - 1] -= 1.0;
        }
        if (centered) {
            const double shift =
                (static_cast<double>(m_round_) / static_cast<double>(x_r_size_)) * sum_of(x);
            for (double& v : out) v -= shift;
        }
        return out;
    }

private:
    OracleSession<Clause>& session_;
    const ParityChannel& channel_;
    const BipartiteShape& shape_;
    std::uint64_t m_round_;
    std::uint64_t x_r_size_;
};

struct RecoveryPlan {
    ComplexityCertificate cert;
    ParityChannel channel;
    std::uint64_t x_r_size = 0;
    std::uint64_t m_heldout = 0;
    std::uint64_t m_iter = 0;
    std::uint64_t m_round = 0;
    std::int32_t rounds = 0;
    std::int32_t formulas_per_attempt = 0;
};

RecoveryPlan make_plan(const ClauseDistribution& q, std::int32_t n, const SolveOptions& options,
                       const BipartiteShape* shape) {
    RecoveryPlan plan{q.complexity(), ParityChannel{}};
    plan.channel = subsample_to_parity(q, plan.cert);
    plan.x_r_size = count_tuples(n, plan.cert.r);
    plan.m_heldout =
        static_cast<std::uint64_t>(static_cast<double>(options.m) * options.heldout_fraction);
    plan.m_iter = options.m - plan.m_heldout;
    if (shape) {
        plan.rounds = options.rounds.value_or(default_rounds(shape->geometric_size));
        if (plan.rounds < 1) throw std::invalid_argument("round count must be positive");
        plan.formulas_per_attempt =
            (plan.cert.r % 2 == 0) ? plan.rounds + 1 : 2 * plan.rounds;
        plan.m_round = plan.m_iter / static_cast<std::uint64_t>(plan.formulas_per_attempt);
    }
    return plan;
}

std::vector<Assignment> decode_both_signs(const std::vector<std::int8_t>& u_star,
                                          const TupleIndexer& indexer,
                                          const DecodeOptions& options,
                                          std::string& failure_reason) {
    std::vector<std::int8_t> flipped(u_star.size());
    for (std::size_t j = 0; j < u_star.size(); ++j)
        flipped[j] = static_cast<std::int8_t>(-u_star[j]);

    std::vector<Assignment> candidates;
    const DecodeResult plus = parity_decode(u_star, indexer, options);
    const DecodeResult minus = parity_decode(flipped, indexer, options);
    for (const auto* res : {&plus, &minus})
        candidates.insert(candidates.end(), res->solutions.begin(), res->solutions.end());
    if (candidates.empty())
        failure_reason = plus.failure_reason.empty() ? minus.failure_reason : plus.failure_reason;
    return candidates;
}

void finish_report(SolveReport& report, const Disambiguation& dis, const Assignment* truth) {
    report.tie_class = dis.tie_class;
    report.tie_class_size = dis.tie_class.size();
    report.llr_per_clause = dis.llr_per_clause;
    report.success = !dis.tie_class.empty();
    if (truth && !truth->empty()) {
        double best_agreement = 0.0;
        bool exact = false;
        for (const Assignment& cand : report.tie_class) {
            std::size_t matches = 0;
            for (std::size_t v = 0; v < truth->size(); ++v)
                if (cand[v] == (*truth)[v]) ++matches;
            best_agreement =
                std::max(best_agreement, static_cast<double>(matches) /
                                             static_cast<double>(truth->size()));
            if (cand == *truth) exact = true;
        }
        report.agreement_fraction = best_agreement;
        report.recovered = exact;
    }
}

// Dedicated estimator for r = 1 sources: every position with a surviving
// singleton coefficient votes on its variable's sign.
SolveReport solve_rank_one(const ClauseDistribution& q, ClauseStream& stream,
                           const RecoveryPlan& plan, const SolveOptions& options, Rng& solver_rng,
                           const Assignment* truth) {
    const std::int32_t n = stream.n();
    const std::int32_t k = q.k();
    std::vector<double> coeff(static_cast<std::size_t>(k), 0.0);
    for (std::int32_t i = 0; i < k; ++i) {
        const double c = std::ldexp(q.fourier_coefficient(std::uint32_t{1} << i), k);
        if (std::fabs(c) > kFourierZeroTolerance * std::ldexp(1.0, k))
            coeff[static_cast<std::size_t>(i)] = c;
    }

    std::vector<double> score(static_cast<std::size_t>(n), 0.0);
    for (std::uint64_t s = 0; s < options.m; ++s) {
        const Clause clause = stream.next();
        for (std::int32_t i = 0; i < k; ++i) {
            const double c = coeff[static_cast<std::size_t>(i)];
            if (c == 0.0) continue;
            const Literal lit = clause[static_cast<std::size_t>(i)];
            score[static_cast<std::size_t>(lit.variable)] += lit.negated ? -c : c;
        }
    }

    Assignment sigma_hat(static_cast<std::size_t>(n));
    for (std::int32_t v = 0; v < n; ++v) {
        const double s = score[static_cast<std::size_t>(v)];
        sigma_hat[static_cast<std::size_t>(v)] =
            s > 0.0 ? 1 : (s < 0.0 ? -1 : static_cast<std::int8_t>(solver_rng.coin_pm1()));
    }

    SolveReport report;
    report.n = n;
    report.k = k;
    report.r = 1;
    report.delta = plan.channel.delta;
    report.m_used = options.m;
    report.iterations = 1;
    Disambiguation dis;
    dis.tie_class.push_back(std::move(sigma_hat));
    finish_report(report, dis, truth);
    return report;
}

}  // namespace

SolveReport solve_from_stream(const ClauseDistribution& q, ClauseStream& stream,
                              const SolveOptions& options, Rng solver_rng,
                              const Assignment* truth) {
    const auto t0 = std::chrono::steady_clock::now();
    if (q.k() != stream.k())
        throw std::invalid_argument("distribution arity does not match stream arity");
    const std::int32_t n = stream.n();

    SolveReport report;
    report.n = n;
    report.k = q.k();

    if (q.complexity().r == 1) {
        const RecoveryPlan plan = make_plan(q, n, options, nullptr);
        report = solve_rank_one(q, stream, plan, options, solver_rng, truth);
        report.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        return report;
    }

    const BipartiteShape shape(n, q.complexity().r, options.memory_cap_entries);
    const RecoveryPlan plan = make_plan(q, n, options, &shape);
    report.r = plan.cert.r;
    report.delta = plan.channel.delta;
    report.iterations = plan.rounds;

    const TupleIndexer& u_indexer =
        (plan.cert.r % 2 == 0) ? shape.row_indexer : shape.col_indexer;

    std::uint64_t consumed = 0;
    std::vector<Assignment> candidates;
    std::string decode_failure;
    for (std::int32_t attempt = 0; attempt <= options.max_restarts; ++attempt) {
        DirectMatVec matvec(stream, plan.channel, shape, plan.m_round, plan.x_r_size, consumed);
        const PowerIterationResult power = power_iterate(shape, matvec, plan.rounds, solver_rng);
        candidates = decode_both_signs(power.u_star, u_indexer, options.decode, decode_failure);
        if (!candidates.empty()) break;
    }

    Formula heldout;
    heldout.reserve(plan.m_heldout);
    for (std::uint64_t i = 0; i < plan.m_heldout; ++i) heldout.push_back(stream.next());
    consumed += plan.m_heldout;
    report.m_used = consumed;

    if (candidates.empty()) {
        report.failure_reason = decode_failure;
    } else {
        finish_report(report, disambiguate(q, candidates, heldout), truth);
    }
    report.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

SolveReport solve_via_oracle(const ClauseDistribution& q, OracleSession<Clause>& session,
                             const SolveOptions& options, Rng solver_rng,
                             const Assignment* truth) {
    const auto t0 = std::chrono::steady_clock::now();
    auto* clause_stream = dynamic_cast<ClauseStream*>(&session.stream());
    if (!clause_stream) throw std::invalid_argument("statistical recovery needs a clause stream");
    if (q.k() != clause_stream->k())
        throw std::invalid_argument("distribution arity does not match stream arity");
    const std::int32_t n = clause_stream->n();
    const std::uint64_t queries_before = session.samples_consumed();

    if (q.complexity().r == 1)
        throw std::logic_error("statistical recovery is implemented for r >= 2; use direct mode");

    const BipartiteShape shape(n, q.complexity().r, options.memory_cap_entries);
    const RecoveryPlan plan = make_plan(q, n, options, &shape);

    SolveReport report;
    report.n = n;
    report.k = q.k();
    report.r = plan.cert.r;
    report.delta = plan.channel.delta;
    report.iterations = plan.rounds;

    const TupleIndexer& u_indexer =
        (plan.cert.r % 2 == 0) ? shape.row_indexer : shape.col_indexer;

    std::vector<Assignment> candidates;
    std::string decode_failure;
    for (std::int32_t attempt = 0; attempt <= options.max_restarts; ++attempt) {
        OracleMatVec matvec(session, plan.channel, shape, plan.m_round, plan.x_r_size);
        const PowerIterationResult power = power_iterate(shape, matvec, plan.rounds, solver_rng);
        candidates = decode_both_signs(power.u_star, u_indexer, options.decode, decode_failure);
        if (!candidates.empty()) break;
    }

    if (candidates.empty()) {
        report.failure_reason = decode_failure;
        // Direct mode still consumes its held-out clauses on failure; mirror
        // that so a shared seeded stream stays aligned across modes.
        const QueryFunction<Clause> h_burn{2, [](const Clause&) { return 0; }};
        for (std::uint64_t i = 0; i < plan.m_heldout; ++i) (void)session.query_1stat(h_burn);
    } else {
        std::vector<Assignment> uniq = dedupe_candidates(candidates);
        std::vector<double> scores(uniq.size(), 0.0);
        session.stream().mark();
        for (std::size_t c = 0; c < uniq.size(); ++c) {
            session.stream().rewind();
            const Assignment& cand = uniq[c];
            const QueryFunction<Clause> h_pattern{
                1 << q.k(),
                [&cand](const Clause& kc) {
                    return static_cast<std::int32_t>(evaluate_pattern(cand, kc));
                }};
            double score = 0.0;
            for (std::uint64_t i = 0; i < plan.m_heldout; ++i) {
                const std::int32_t value = session.query_1mstat(h_pattern);
                const double w = q.weight(static_cast<std::uint32_t>(value));
                if (w <= 0.0) {
                    score = kNegInf;
                    // Keep consuming so every candidate sees the same clauses.
                    for (std::uint64_t rest = i + 1; rest < plan.m_heldout; ++rest)
                        (void)session.query_1mstat(h_pattern);
                    break;
                }
                score += std::log(w);
            }
            scores[c] = score;
        }
        finish_report(report, pick_from_scores(std::move(uniq), scores, plan.m_heldout, q.k()),
                      truth);
    }

    report.queries = session.samples_consumed() - queries_before;
    report.m_used = report.queries;
    report.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

SolveReport solve_planted(const PlantedModel& model, const SolveOptions& options, Rng stream_rng,
                          Rng solver_rng) {
    if (model.is_predicate())
        throw std::invalid_argument("direct recovery expects a clause-distribution model");
    ClauseStream stream(model, stream_rng);
    return solve_from_stream(model.distribution(), stream, options, solver_rng, &model.sigma());
}

std::string SolveReport::to_json() const {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["n"] = n;
    j["k"] = k;
    j["r"] = r;
    j["delta"] = delta;
    j["m_used"] = m_used;
    j["queries"] = queries;
    j["iterations"] = iterations;
    j["success"] = success;
    j["recovered"] = recovered;
    j["agreement_fraction"] = agreement_fraction;
    j["tie_class_size"] = tie_class_size;
    j["wall_ms"] = wall_ms;
    if (std::isfinite(llr_per_clause))
        j["llr_per_clause"] = llr_per_clause;
    else
        j["llr_per_clause"] = nullptr;
    if (!failure_reason.empty()) j["failure_reason"] = failure_reason;
    return j.dump();
}

}  // namespace plantedcsp
