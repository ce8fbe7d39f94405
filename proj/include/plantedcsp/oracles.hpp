#pragma once

// Statistical-oracle simulators: 1-STAT, 1-MSTAT, VSTAT(t), MVSTAT(L, t) in
// honest (sample-backed) and adversarial (reference-clamped) modes, with
// budget accounting, JSONL transcripts, and the oracle-to-oracle reductions
// (MVSTAT via VSTAT, 1-MSTAT via 1-STAT).
//
// Sessions are single-owner mutable state. Honest VSTAT draws a fresh batch of
// t samples per query; when the source is enumerable the answer is clamped
// into [p - tau, p + tau] around the exact expectation, with
// tau = max{1/t, sqrt(p(1-p)/t)}. Adversarial mode answers with the reference
// distribution's expectation clamped into the same band (the most
// uniform-looking valid answer) and requires enumerability.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "plantedcsp/clause_space.hpp"
#include "plantedcsp/planting.hpp"
#include "plantedcsp/rng.hpp"

namespace plantedcsp {

inline constexpr std::uint64_t kEnumerationGuard = 10'000'000;

struct BudgetExhaustedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

double vstat_tolerance(double p, std::uint64_t t);

/// h: sample -> {0, ..., L-1}, total on the sample domain.
template <typename SampleT>
struct QueryFunction {
    std::int32_t L = 2;
    std::function<std::int32_t(const SampleT&)> eval;

    QueryFunction(std::int32_t range, std::function<std::int32_t(const SampleT&)> fn)
        : L(range), eval(std::move(fn)) {
        if (L < 2) throw std::invalid_argument("query range must be >= 2");
        if (!eval) throw std::invalid_argument("query function must be total");
    }
};

struct SubsetSpec {
    std::vector<std::vector<std::int32_t>> sets;

    void validate(std::int32_t L) const {
        if (sets.empty()) throw std::invalid_argument("subset spec must be nonempty");
        for (const auto& set : sets) {
            if (set.empty()) throw std::invalid_argument("subsets must be nonempty");
            for (const auto v : set)
                if (v < 0 || v >= L) throw std::invalid_argument("subset element out of range");
        }
    }
};

// A seeded stream of samples. Enumerable streams expose their exact law for
// clamping and adversarial answers. mark()/rewind() snapshot and restore the
// stream state so two query passes can consume identical samples (the shared
// stream used for statistical-vs-direct solver parity).
template <typename SampleT>
class SampleStream {
public:
    virtual ~SampleStream() = default;

    virtual SampleT next() = 0;
    virtual bool enumerable() const = 0;

    // Calls visit(sample, probability) for every atom of the law.
    virtual void enumerate(const std::function<void(const SampleT&, double)>& visit) const = 0;

    virtual void mark() = 0;
    virtual void rewind() = 0;

    double exact_probability(const QueryFunction<SampleT>& h, std::int32_t value) const {
        if (!enumerable()) throw std::logic_error("source is not enumerable");
        double p = 0.0;
        enumerate([&](const SampleT& sample, double prob) {
            if (h.eval(sample) == value) p += prob;
        });
        return p;
    }

    std::vector<double> exact_histogram(const QueryFunction<SampleT>& h) const {
        if (!enumerable()) throw std::logic_error("source is not enumerable");
        std::vector<double> hist(static_cast<std::size_t>(h.L), 0.0);
        enumerate([&](const SampleT& sample, double prob) {
            const std::int32_t value = h.eval(sample);
            if (value < 0 || value >= h.L)
                throw std::out_of_range("query value outside {0..L-1}");
            hist[static_cast<std::size_t>(value)] += prob;
        });
        return hist;
    }
};

// Clause samples from a planted model (Q_sigma) or the uniform law U_k.
class ClauseStream final : public SampleStream<Clause> {
public:
    ClauseStream(PlantedModel model, Rng rng);             // planted Q_sigma
    ClauseStream(std::int32_t n, std::int32_t k, Rng rng); // uniform U_k

    Clause next() override;
    bool enumerable() const override;
    void enumerate(const std::function<void(const Clause&, double)>& visit) const override;
    void mark() override { saved_ = rng_; }
    void rewind() override { rng_ = saved_; }

    std::int32_t n() const { return n_; }
    std::int32_t k() const { return k_; }
    const std::optional<PlantedModel>& model() const { return model_; }

private:
    std::optional<PlantedModel> model_;
    std::int32_t n_;
    std::int32_t k_;
    Rng rng_;
    Rng saved_;
};

// Labeled Goldreich tuples from a predicate model.
class GoldreichStream final : public SampleStream<GoldreichSample> {
public:
    GoldreichStream(PlantedModel model, Rng rng);

    GoldreichSample next() override;
    bool enumerable() const override;
    void enumerate(const std::function<void(const GoldreichSample&, double)>& visit) const override;
    void mark() override { saved_ = rng_; }
    void rewind() override { rng_ = saved_; }

private:
    PlantedModel model_;
    Rng rng_;
    Rng saved_;
};

enum class OracleMode { honest, adversarial };

struct TranscriptRecord {
    std::uint64_t query_id = 0;
    std::string kind;
    std::int32_t L = 2;
    std::uint64_t t = 0;
    double cost = 0.0;  // samples consumed by this call
    std::string answer_digest;
};

std::string digest_bytes(const std::string& bytes);
std::string digest_value(double value);
std::string digest_vector(const std::vector<double>& values);
void write_transcript_jsonl(const std::vector<TranscriptRecord>& records, std::ostream& out);

struct VStatOutcome {
    double value = 0.0;      // the returned answer
    double raw_mean = 0.0;   // unclamped empirical mean (honest mode)
    double tau = 0.0;
    std::optional<double> exact_p;
    bool clamped = false;
};

struct MVStatOutcome {
    std::vector<double> values;
    std::int32_t violated_subsets = 0;  // against exact p_Z, when enumerable
    std::int32_t checked_subsets = 0;
};

template <typename SampleT>
class OracleSession {
public:
    // Honest session. `t` is the VSTAT/MVSTAT sample-size parameter.
    OracleSession(std::shared_ptr<SampleStream<SampleT>> source, std::uint64_t t, Rng rng)
        : source_(std::move(source)), mode_(OracleMode::honest), t_(t), rng_(rng) {}

    // Adversarial session: answers VSTAT queries with the reference
    // expectation clamped into the valid band. Both laws must be enumerable.
    OracleSession(std::shared_ptr<SampleStream<SampleT>> source,
                  std::shared_ptr<SampleStream<SampleT>> reference, std::uint64_t t, Rng rng)
        : source_(std::move(source)), reference_(std::move(reference)),
          mode_(OracleMode::adversarial), t_(t), rng_(rng) {
        if (!source_->enumerable() || !reference_->enumerable())
            throw std::invalid_argument("adversarial mode requires enumerable laws");
    }

    OracleMode mode() const { return mode_; }
    std::uint64_t t() const { return t_; }
    std::uint64_t samples_consumed() const { return samples_consumed_; }
    double oracle_query_cost() const { return oracle_query_cost_; }
    const std::vector<TranscriptRecord>& transcript() const { return transcript_; }
    // Cost that bypassed the transcript while recording was disabled; the
    // accounting identity is samples_consumed == sum(costs) + untracked_cost.
    double untracked_cost() const { return untracked_cost_; }
    SampleStream<SampleT>& stream() { return *source_; }

    void set_sample_budget(std::optional<std::uint64_t> budget) { budget_ = budget; }

    // Reuse flag: when set, honest VSTAT/MVSTAT queries share one cached batch
    // of t samples instead of drawing fresh ones per query. Off by default.
    void set_batch_reuse(bool reuse) {
        reuse_ = reuse;
        if (!reuse) batch_.clear();
    }

    std::int32_t query_1stat(const QueryFunction<SampleT>& h) {
        if (h.L != 2) throw std::invalid_argument("1-STAT queries must be 0/1-valued");
        return one_sample_query(h, "1-STAT");
    }

    std::int32_t query_1mstat(const QueryFunction<SampleT>& h) {
        return one_sample_query(h, "1-MSTAT");
    }

    double query_vstat(const QueryFunction<SampleT>& h) {
        if (h.L != 2) throw std::invalid_argument("VSTAT queries must be 0/1-valued");
        VStatOutcome outcome;
        if (mode_ == OracleMode::adversarial) {
            const double p = source_->exact_probability(h, 1);
            const double reference = reference_->exact_probability(h, 1);
            outcome.tau = vstat_tolerance(p, t_);
            outcome.exact_p = p;
            const std::string key = behavior_digest(h);
            if (const auto it = adversarial_answers_.find(key); it != adversarial_answers_.end()) {
                outcome.value = it->second;  // transcript consistency for repeats
                outcome.raw_mean = it->second;
            } else {
                outcome.value = std::clamp(reference, p - outcome.tau, p + outcome.tau);
                outcome.raw_mean = outcome.value;
                adversarial_answers_.emplace(key, outcome.value);
            }
            outcome.clamped = true;
            oracle_query_cost_ += 1.0;
            record("VSTAT", 2, t_, 0.0, digest_value(outcome.value));
        } else {
            const std::vector<std::int32_t> counts = honest_histogram(h);
            outcome.raw_mean = static_cast<double>(counts[1]) / static_cast<double>(t_);
            outcome.value = outcome.raw_mean;
            if (source_->enumerable()) {
                const double p = source_->exact_probability(h, 1);
                outcome.exact_p = p;
                outcome.tau = vstat_tolerance(p, t_);
                outcome.value = std::clamp(outcome.raw_mean, p - outcome.tau, p + outcome.tau);
                outcome.clamped = true;
            } else {
                outcome.tau = vstat_tolerance(outcome.raw_mean, t_);
            }
            oracle_query_cost_ += 1.0;
            record("VSTAT", 2, t_, static_cast<double>(t_), digest_value(outcome.value));
        }
        last_vstat_ = outcome;
        return outcome.value;
    }

    std::vector<double> query_mvstat(const QueryFunction<SampleT>& h, const SubsetSpec& spec) {
        if (mode_ != OracleMode::honest)
            throw std::logic_error("adversarial MVSTAT answers are not specified; use the reduction");
        spec.validate(h.L);
        const std::vector<std::int32_t> counts = honest_histogram(h);
        MVStatOutcome outcome;
        outcome.values.resize(static_cast<std::size_t>(h.L));
        for (std::int32_t v = 0; v < h.L; ++v)
            outcome.values[static_cast<std::size_t>(v)] =
                static_cast<double>(counts[static_cast<std::size_t>(v)]) / static_cast<double>(t_);
        if (source_->enumerable()) {
            const std::vector<double> exact = source_->exact_histogram(h);
            for (const auto& subset : spec.sets) {
                double v_z = 0.0;
                double p_z = 0.0;
                for (const auto idx : subset) {
                    v_z += outcome.values[static_cast<std::size_t>(idx)];
                    p_z += exact[static_cast<std::size_t>(idx)];
                }
                ++outcome.checked_subsets;
                if (std::fabs(v_z - p_z) > vstat_tolerance(p_z, t_)) ++outcome.violated_subsets;
            }
        }
        oracle_query_cost_ += static_cast<double>(spec.sets.size());
        record("MVSTAT", h.L, t_, static_cast<double>(t_), digest_vector(outcome.values));
        last_mvstat_ = outcome;
        return outcome.values;
    }

    const VStatOutcome& last_vstat() const { return last_vstat_; }
    const MVStatOutcome& last_mvstat() const { return last_mvstat_; }

    Rng& rng() { return rng_; }

    // Per-call transcript records can be disabled for high-volume algorithmic
    // runs; the samples_consumed / query-cost counters always stay exact.
    void set_transcript_enabled(bool enabled) { transcript_enabled_ = enabled; }

private:
    std::int32_t one_sample_query(const QueryFunction<SampleT>& h, const char* kind) {
        charge_samples(1);
        const SampleT sample = source_->next();
        const std::int32_t value = h.eval(sample);
        if (value < 0 || value >= h.L) throw std::out_of_range("query value outside {0..L-1}");
        ++samples_consumed_;
        oracle_query_cost_ += 1.0;
        record(kind, h.L, 0, 1.0, digest_value(static_cast<double>(value)));
        return value;
    }

    std::vector<std::int32_t> honest_histogram(const QueryFunction<SampleT>& h) {
        std::vector<std::int32_t> counts(static_cast<std::size_t>(h.L), 0);
        const bool use_cache = reuse_ && !batch_.empty();
        if (!use_cache) {
            charge_samples(t_);
            if (reuse_) batch_.clear();
            for (std::uint64_t i = 0; i < t_; ++i) {
                SampleT sample = source_->next();
                const std::int32_t value = h.eval(sample);
                if (value < 0 || value >= h.L)
                    throw std::out_of_range("query value outside {0..L-1}");
                ++counts[static_cast<std::size_t>(value)];
                if (reuse_) batch_.push_back(std::move(sample));
            }
            samples_consumed_ += t_;
        } else {
            for (const SampleT& sample : batch_) {
                const std::int32_t value = h.eval(sample);
                if (value < 0 || value >= h.L)
                    throw std::out_of_range("query value outside {0..L-1}");
                ++counts[static_cast<std::size_t>(value)];
            }
        }
        return counts;
    }

    void charge_samples(std::uint64_t amount) {
        if (budget_ && samples_consumed_ + amount > *budget_)
            throw BudgetExhaustedError("oracle sample budget exhausted");
    }

    // Canonical digest of a query's behavior over the enumerated domain, used
    // to detect repeated identical adversarial queries.
    std::string behavior_digest(const QueryFunction<SampleT>& h) const {
        std::string bytes;
        source_->enumerate([&](const SampleT& sample, double) {
            bytes.push_back(static_cast<char>('0' + (h.eval(sample) & 0x7f)));
        });
        return digest_bytes(bytes);
    }

    void record(const char* kind, std::int32_t L, std::uint64_t t, double cost,
                std::string digest) {
        if (!transcript_enabled_) {
            untracked_cost_ += cost;
            return;
        }
        TranscriptRecord rec;
        rec.query_id = next_query_id_++;
        rec.kind = kind;
        rec.L = L;
        rec.t = t;
        rec.cost = cost;
        rec.answer_digest = std::move(digest);
        transcript_.push_back(std::move(rec));
    }

    std::shared_ptr<SampleStream<SampleT>> source_;
    std::shared_ptr<SampleStream<SampleT>> reference_;
    OracleMode mode_;
    std::uint64_t t_ = 1;
    Rng rng_;
    std::uint64_t samples_consumed_ = 0;
    double oracle_query_cost_ = 0.0;
    std::optional<std::uint64_t> budget_;
    bool reuse_ = false;
    bool transcript_enabled_ = true;
    double untracked_cost_ = 0.0;
    std::vector<SampleT> batch_;
    std::uint64_t next_query_id_ = 0;
    std::vector<TranscriptRecord> transcript_;
    VStatOutcome last_vstat_;
    MVStatOutcome last_mvstat_;
    std::unordered_map<std::string, double> adversarial_answers_;
};

// MVSTAT(L, t) from a VSTAT(4Lt) backend: queries the L value indicators and
// returns the estimate vector. With any band-respecting backend the resulting
// vector satisfies every MVSTAT(L, t) subset constraint.
template <typename SampleT>
std::vector<double> reduce_mvstat_to_vstat(
    const QueryFunction<SampleT>& h, const SubsetSpec& spec,
    const std::function<double(const QueryFunction<SampleT>&)>& vstat_backend) {
    spec.validate(h.L);
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(h.L));
    for (std::int32_t i = 0; i < h.L; ++i) {
        QueryFunction<SampleT> indicator(
            2, [&h, i](const SampleT& sample) { return h.eval(sample) == i ? 1 : 0; });
        values.push_back(vstat_backend(indicator));
    }
    return values;
}

// 1-MSTAT via 1-STAT (coin construction). Returns a value in {0..L-1} or
// nullopt. On success the output law over {0..L-1} is exactly (p_0..p_{L-1}),
// and every success consumes exactly L+1 backend calls.
template <typename SampleT>
std::optional<std::int32_t> simulate_1mstat_via_1stat(
    const QueryFunction<SampleT>& h,
    const std::function<std::int32_t(const QueryFunction<SampleT>&)>& onestat_backend, Rng& rng) {
    std::int32_t hot_index = -1;
    std::int32_t hot_count = 0;
    for (std::int32_t i = 0; i < h.L; ++i) {
        QueryFunction<SampleT> indicator(
            2, [&h, i](const SampleT& sample) { return h.eval(sample) == i ? 1 : 0; });
        const std::int32_t outcome = onestat_backend(indicator);
        const bool b = (outcome == 1) && (rng.next_u64() & 1);
        if (b) {
            ++hot_count;
            hot_index = i;
        }
    }
    if (hot_count != 1) return std::nullopt;
    // Confirmation query on the unique hot index; reject if it fires again.
    QueryFunction<SampleT> confirm(
        2, [&h, hot_index](const SampleT& sample) { return h.eval(sample) == hot_index ? 1 : 0; });
    const std::int32_t outcome = onestat_backend(confirm);
    const bool b_prime = (outcome == 1) && (rng.next_u64() & 1);
    if (b_prime) return std::nullopt;
    return hot_index;
}

}  // namespace plantedcsp
