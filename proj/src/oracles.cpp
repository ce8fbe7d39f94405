#include "plantedcsp/oracles.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>

namespace plantedcsp {

double vstat_tolerance(double p, std::uint64_t t) {
    const double td = static_cast<double>(t);
    return std::max(1.0 / td, std::sqrt(p * (1.0 - p) / td));
}

std::string digest_bytes(const std::string& bytes) {
    // FNV-1a, 64-bit; stable across platforms.
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (const unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, hash);
    return std::string(buf);
}

std::string digest_value(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return digest_bytes(buf);
}

std::string digest_vector(const std::vector<double>& values) {
    std::string bytes;
    bytes.reserve(values.size() * 24);
    char buf[40];
    for (const double v : values) {
        std::snprintf(buf, sizeof buf, "%.17g,", v);
        bytes += buf;
    }
    return digest_bytes(bytes);
}

void write_transcript_jsonl(const std::vector<TranscriptRecord>& records, std::ostream& out) {
    char buf[64];
    for (const TranscriptRecord& rec : records) {
        out << "{\"query_id\":" << rec.query_id << ",\"kind\":\"" << rec.kind
            << "\",\"L\":" << rec.L << ",\"t\":" << rec.t << ",\"cost\":";
        std::snprintf(buf, sizeof buf, "%.17g", rec.cost);
        out << buf << ",\"answer_digest\":\"" << rec.answer_digest << "\"}\n";
    }
}

ClauseStream::ClauseStream(PlantedModel model, Rng rng)
    : model_(std::move(model)), n_(model_->n()), k_(model_->k()), rng_(rng), saved_(rng) {
    model_->distribution();  // clause models only
}

ClauseStream::ClauseStream(std::int32_t n, std::int32_t k, Rng rng)
    : n_(n), k_(k), rng_(rng), saved_(rng) {
    if (n < k || k < 1) throw std::invalid_argument("bad uniform stream shape");
}

Clause ClauseStream::next() {
    if (model_) return sample_planted_clause(*model_, rng_);
    return sample_uniform_clause(n_, k_, rng_);
}

bool ClauseStream::enumerable() const {
    return count_tuples(n_, k_) <= kEnumerationGuard;
}

void ClauseStream::enumerate(const std::function<void(const Clause&, double)>& visit) const {
    if (!enumerable()) throw std::logic_error("clause space exceeds the enumeration guard");
    const TupleIndexer indexer(n_, k_);
    const double size = static_cast<double>(indexer.size());
    const double uniform_prob = 1.0 / size;
    const double patterns = model_ ? static_cast<double>(model_->distribution().table_size()) : 0.0;
    for (std::uint64_t idx = 0; idx < indexer.size(); ++idx) {
        const Clause clause = indexer.unindex(idx);
        if (model_) {
            const auto pattern = evaluate_pattern(model_->sigma(), clause);
            visit(clause, model_->distribution().weight(pattern) * patterns / size);
        } else {
            visit(clause, uniform_prob);
        }
    }
}

GoldreichStream::GoldreichStream(PlantedModel model, Rng rng)
    : model_(std::move(model)), rng_(rng), saved_(rng) {
    model_.predicate();  // predicate models only
}

GoldreichSample GoldreichStream::next() { return sample_goldreich(model_, rng_); }

bool GoldreichStream::enumerable() const {
    return count_var_tuples(model_.n(), model_.k()) <= kEnumerationGuard;
}

void GoldreichStream::enumerate(
    const std::function<void(const GoldreichSample&, double)>& visit) const {
    if (!enumerable()) throw std::logic_error("tuple space exceeds the enumeration guard");
    const VarTupleIndexer indexer(model_.n(), model_.k());
    const double prob = 1.0 / static_cast<double>(indexer.size());
    for (std::uint64_t idx = 0; idx < indexer.size(); ++idx) {
        GoldreichSample sample;
        sample.variables = indexer.unindex(idx);
        std::uint32_t pattern = 0;
        for (std::size_t i = 0; i < sample.variables.size(); ++i)
            if (model_.sigma()[static_cast<std::size_t>(sample.variables[i])] == -1)
                pattern |= (1u << i);
        sample.label = model_.predicate().value(pattern) ? 1 : -1;
        visit(sample, prob);
    }
}

}  // namespace plantedcsp
