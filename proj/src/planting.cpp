#include "plantedcsp/planting.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <unordered_set>

namespace plantedcsp {

namespace {

void check_model_shape(std::int32_t n, std::int32_t k) {
    if (n < k) throw std::invalid_argument("model needs n >= k");
}

void draw_distinct_variables(std::int32_t n, std::int32_t k, Rng& rng, std::int32_t* out) {
    for (std::int32_t i = 0; i < k; ++i) {
        while (true) {
            const auto v = static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(n)));
            bool repeat = false;
            for (std::int32_t j = 0; j < i; ++j)
                if (out[j] == v) { repeat = true; break; }
            if (!repeat) { out[i] = v; break; }
        }
    }
}

// Clause on the given variables whose evaluation pattern under sigma is
// exactly `pattern`: negated = (sigma_v is TRUE) != (position wants TRUE).
Clause clause_with_pattern(const Assignment& sigma, const std::int32_t* vars, std::int32_t k,
                           std::uint32_t pattern) {
    Clause clause(static_cast<std::size_t>(k));
    for (std::int32_t i = 0; i < k; ++i) {
        const bool want_true = (pattern >> i) & 1u;
        const bool sigma_true = sigma[static_cast<std::size_t>(vars[i])] == -1;
        clause[static_cast<std::size_t>(i)] = Literal{vars[i], sigma_true != want_true};
    }
    return clause;
}

}  // namespace

PlantedModel::PlantedModel(ClauseDistribution q, Assignment sigma)
    : q_(std::move(q)), sigma_(std::move(sigma)) {
    check_model_shape(n(), q_->k());
    pattern_cdf_.resize(q_->table_size());
    double acc = 0.0;
    for (std::uint32_t y = 0; y < q_->table_size(); ++y) {
        acc += q_->weight(y);
        pattern_cdf_[y] = acc;
    }
    pattern_cdf_.back() = 1.0;  // guard the inverse-CDF draw against rounding
}

PlantedModel::PlantedModel(Predicate p, Assignment sigma)
    : predicate_(std::move(p)), sigma_(std::move(sigma)) {
    check_model_shape(n(), predicate_->k());
}

std::int32_t PlantedModel::k() const { return q_ ? q_->k() : predicate_->k(); }

const ClauseDistribution& PlantedModel::distribution() const {
    if (!q_) throw std::logic_error("predicate model has no clause distribution");
    return *q_;
}

const Predicate& PlantedModel::predicate() const {
    if (!predicate_) throw std::logic_error("clause model has no predicate");
    return *predicate_;
}

double PlantedModel::clause_probability(const Clause& clause) const {
    const auto pattern = evaluate_pattern(sigma_, clause);
    const double class_size =
        static_cast<double>(count_tuples(n(), k())) / static_cast<double>(distribution().table_size());
    return distribution().weight(pattern) / class_size;
}

Assignment random_assignment(std::int32_t n, Rng& rng) {
    Assignment sigma(static_cast<std::size_t>(n));
    for (auto& value : sigma) value = static_cast<std::int8_t>(rng.coin_pm1());
    return sigma;
}

Clause sample_uniform_clause(std::int32_t n, std::int32_t k, Rng& rng) {
    std::int32_t vars[kMaxArity];
    draw_distinct_variables(n, k, rng, vars);
    Clause clause(static_cast<std::size_t>(k));
    for (std::int32_t i = 0; i < k; ++i)
        clause[static_cast<std::size_t>(i)] = Literal{vars[i], (rng.next_u64() & 1) != 0};
    return clause;
}

std::uint32_t PlantedModel::sample_pattern(Rng& rng) const {
    distribution();  // validates that this is a clause model
    const double u = rng.uniform01();
    const auto it = std::upper_bound(pattern_cdf_.begin(), pattern_cdf_.end(), u);
    return static_cast<std::uint32_t>(it - pattern_cdf_.begin());
}

Clause sample_planted_clause(const PlantedModel& model, Rng& rng) {
    const std::uint32_t pattern = model.sample_pattern(rng);
    std::int32_t vars[kMaxArity];
    draw_distinct_variables(model.n(), model.k(), rng, vars);
    return clause_with_pattern(model.sigma(), vars, model.k(), pattern);
}

Formula sample_formula(const PlantedModel& model, std::uint64_t m, Rng& rng) {
    Formula formula;
    formula.reserve(m);
    for (std::uint64_t i = 0; i < m; ++i) formula.push_back(sample_planted_clause(model, rng));
    return formula;
}

ParityChannel subsample_to_parity(const ClauseDistribution& q, const ComplexityCertificate& cert,
                                  double tolerance) {
    const std::int32_t k = q.k();
    const std::int32_t r = cert.r;
    if (cert.witness_mask == 0 || cert.witness_mask >= q.table_size() ||
        std::popcount(cert.witness_mask) != r)
        throw std::invalid_argument("malformed witness certificate");
    const double coefficient = q.fourier_coefficient(cert.witness_mask);
    if (std::fabs(coefficient) <= tolerance)
        throw std::invalid_argument("witness coefficient vanishes; delta = 1 carries no signal");
    // Minimality: every nonempty proper subset of S must have a vanishing
    // coefficient, otherwise the marginal is not a two-value parity table.
    for (std::uint32_t sub = (cert.witness_mask - 1) & cert.witness_mask; sub != 0;
         sub = (sub - 1) & cert.witness_mask) {
        if (std::fabs(q.fourier_coefficient(sub)) > tolerance)
            throw std::invalid_argument("witness is not minimal: a proper subset has signal");
    }

    ParityChannel channel;
    channel.k = k;
    channel.r = r;
    channel.positions = cert.witness;
    const double sign = (r % 2 == 0) ? 1.0 : -1.0;
    channel.delta = 1.0 + sign * static_cast<double>(q.table_size()) * coefficient;

    // Exact marginal from the Fourier form, then the brute-force cross-check.
    const std::uint32_t channel_size = 1u << r;
    channel.marginal.assign(channel_size, 0.0);
    for (std::uint32_t z = 0; z < channel_size; ++z) {
        const int chi = (std::popcount(z) % 2 == 0) ? 1 : -1;
        channel.marginal[z] =
            (1.0 + static_cast<double>(q.table_size()) * coefficient * chi) /
            static_cast<double>(channel_size);
    }
    std::vector<double> brute(channel_size, 0.0);
    for (std::uint32_t y = 0; y < q.table_size(); ++y) {
        std::uint32_t z = 0;
        for (std::size_t i = 0; i < cert.witness.size(); ++i)
            if ((y >> cert.witness[i]) & 1u) z |= (1u << i);
        brute[z] += q.weight(y);
    }
    for (std::uint32_t z = 0; z < channel_size; ++z) {
        if (std::fabs(brute[z] - channel.marginal[z]) > 1e-12)
            throw std::logic_error("parity-channel marginal check failed");
        // The same table, phrased by parity class: even #FALSE strings carry
        // delta/2^r, odd carry (2-delta)/2^r.
        const bool even_false = ((r - std::popcount(z)) % 2) == 0;
        const double expected =
            (even_false ? channel.delta : 2.0 - channel.delta) / static_cast<double>(channel_size);
        if (std::fabs(brute[z] - expected) > 1e-12)
            throw std::logic_error("parity-channel class table check failed");
    }
    return channel;
}

Formula sample_channel_formula(const PlantedModel& model, const ParityChannel& channel,
                               std::uint64_t m, Rng& rng) {
    Formula formula;
    formula.reserve(m);
    for (std::uint64_t i = 0; i < m; ++i)
        formula.push_back(channel.restrict(sample_planted_clause(model, rng)));
    return formula;
}

Formula sample_bernoulli_formula(const ParityChannel& channel, const Assignment& sigma, double p,
                                 Rng& rng) {
    const auto n = static_cast<std::int32_t>(sigma.size());
    const std::int32_t r = channel.r;
    const double p_even = channel.delta * p;
    const double p_odd = (2.0 - channel.delta) * p;
    if (p < 0.0 || p_even > 1.0 || p_odd > 1.0)
        throw std::invalid_argument("inclusion probability out of [0, 1]");

    const TupleIndexer indexer(n, r);
    const std::uint64_t class_size = indexer.size() / 2;  // flip of one sign bijects the classes

    // Draw each class count, then that many distinct uniform class members.
    Formula formula;
    std::unordered_set<std::uint64_t> chosen;
    for (const int parity : {0, 1}) {
        const double prob = (parity == 0) ? p_even : p_odd;
        const std::uint64_t count = rng.binomial(class_size, prob);
        chosen.clear();
        chosen.reserve(static_cast<std::size_t>(count) * 2);
        while (chosen.size() < count) {
            const std::uint64_t idx = rng.below(indexer.size());
            Clause clause = indexer.unindex(idx);
            const int clause_parity = std::popcount(evaluate_pattern(sigma, clause)) % 2;
            if (clause_parity != parity) continue;
            if (!chosen.insert(idx).second) continue;
            formula.push_back(std::move(clause));
        }
    }
    return formula;
}

GoldreichSample sample_goldreich(const PlantedModel& model, Rng& rng) {
    const Predicate& p = model.predicate();
    const std::int32_t k = p.k();
    std::int32_t vars[kMaxArity];
    draw_distinct_variables(model.n(), k, rng, vars);
    GoldreichSample sample;
    sample.variables.assign(vars, vars + k);
    std::uint32_t pattern = 0;
    for (std::int32_t i = 0; i < k; ++i)
        if (model.sigma()[static_cast<std::size_t>(vars[i])] == -1) pattern |= (1u << i);
    sample.label = p.value(pattern) ? 1 : -1;
    return sample;
}

ClauseDistribution induced_clause_distribution(const Predicate& p) {
    double total = 0.0;
    for (const std::uint8_t bit : p.table()) total += bit;
    if (total == 0.0) throw std::invalid_argument("predicate is identically 0");
    std::vector<double> table(p.table().size());
    for (std::size_t y = 0; y < table.size(); ++y)
        table[y] = static_cast<double>(p.table()[y]) / total;
    return ClauseDistribution::from_table(p.k(), std::move(table));
}

}  // namespace plantedcsp
