#include "plantedcsp/distribution.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace plantedcsp {

namespace {

void check_arity(std::int32_t k) {
    if (k < 1 || k > kMaxArity)
        throw std::invalid_argument("arity must be in [1, " + std::to_string(kMaxArity) + "]");
}

// Lexicographic comparison of ascending position sequences (not integer masks:
// {0,3} precedes {1,2} even though 0b1001 > 0b0110).
bool positions_lex_less(std::uint32_t a, std::uint32_t b) {
    while (a != 0 && b != 0) {
        const int pa = std::countr_zero(a);
        const int pb = std::countr_zero(b);
        if (pa != pb) return pa < pb;
        a &= a - 1;
        b &= b - 1;
    }
    return a == 0 && b != 0;
}

ComplexityCertificate certificate_from_fourier(const std::vector<double>& fourier,
                                               std::int32_t k, double tolerance,
                                               const char* uniform_message) {
    const std::uint32_t size = 1u << k;
    for (std::int32_t r = 1; r <= k; ++r) {
        double best = 0.0;
        for (std::uint32_t mask = 1; mask < size; ++mask) {
            if (std::popcount(mask) != r) continue;
            const double magnitude = std::fabs(fourier[mask]);
            if (magnitude > tolerance && magnitude > best) best = magnitude;
        }
        if (best == 0.0) continue;
        // Among coefficients tied with the maximum, take the lexicographically
        // smallest position sequence.
        std::uint32_t best_mask = 0;
        bool have = false;
        for (std::uint32_t mask = 1; mask < size; ++mask) {
            if (std::popcount(mask) != r) continue;
            const double magnitude = std::fabs(fourier[mask]);
            if (magnitude <= tolerance || best - magnitude > 1e-12) continue;
            if (!have || positions_lex_less(mask, best_mask)) {
                best_mask = mask;
                have = true;
            }
        }
        ComplexityCertificate cert;
        cert.r = r;
        cert.witness_mask = best_mask;
        cert.witness = mask_to_positions(best_mask);
        cert.magnitude = std::fabs(fourier[best_mask]);
        cert.coefficient = fourier[best_mask];
        return cert;
    }
    throw UniformDistributionError(uniform_message);
}

}  // namespace

void walsh_hadamard(std::vector<double>& values) {
    const std::size_t size = values.size();
    for (std::size_t len = 1; len < size; len <<= 1) {
        for (std::size_t block = 0; block < size; block += 2 * len) {
            for (std::size_t i = block; i < block + len; ++i) {
                const double u = values[i];
                const double v = values[i + len];
                values[i] = u + v;
                values[i + len] = u - v;
            }
        }
    }
}

std::vector<std::int32_t> mask_to_positions(std::uint32_t mask) {
    std::vector<std::int32_t> positions;
    while (mask != 0) {
        positions.push_back(std::countr_zero(mask));
        mask &= mask - 1;
    }
    return positions;
}

ClauseDistribution ClauseDistribution::from_table(std::int32_t k, std::vector<double> weights) {
    check_arity(k);
    const std::size_t expected = std::size_t{1} << k;
    if (weights.size() != expected)
        throw std::invalid_argument("weight table must have 2^k entries");
    double sum = 0.0;
    for (const double w : weights) {
        if (!(w >= 0.0)) throw std::invalid_argument("negative or non-finite weight");
        sum += w;
    }
    if (std::fabs(sum - 1.0) > kWeightSumTolerance)
        throw std::invalid_argument("weights sum to " + std::to_string(sum) +
                                    ", not 1 (no silent renormalization)");
    ClauseDistribution q;
    q.k_ = k;
    q.weights_ = std::move(weights);
    q.fourier_ = q.weights_;
    walsh_hadamard(q.fourier_);
    const double scale = 1.0 / static_cast<double>(expected);
    for (double& c : q.fourier_) c *= scale;
    return q;
}

ClauseDistribution ClauseDistribution::from_symmetric(std::int32_t k,
                                                      const std::vector<double>& per_true_count) {
    check_arity(k);
    if (per_true_count.size() != static_cast<std::size_t>(k) + 1)
        throw std::invalid_argument("symmetric table must have k+1 entries");
    std::vector<double> table(std::size_t{1} << k);
    for (std::uint32_t mask = 0; mask < table.size(); ++mask)
        table[mask] = per_true_count[static_cast<std::size_t>(std::popcount(mask))];
    return from_table(k, std::move(table));
}

ClauseDistribution ClauseDistribution::uniform(std::int32_t k) {
    check_arity(k);
    return from_table(k, std::vector<double>(std::size_t{1} << k,
                                             1.0 / static_cast<double>(std::size_t{1} << k)));
}

ClauseDistribution ClauseDistribution::planted_uniform_sat(std::int32_t k) {
    check_arity(k);
    std::vector<double> table(std::size_t{1} << k,
                              1.0 / static_cast<double>((std::size_t{1} << k) - 1));
    table[0] = 0.0;  // the all-FALSE pattern is forbidden
    return from_table(k, std::move(table));
}

ClauseDistribution ClauseDistribution::planted_xor(std::int32_t k) {
    check_arity(k);
    std::vector<double> table(std::size_t{1} << k, 0.0);
    const double w = 1.0 / static_cast<double>(std::size_t{1} << (k - 1));
    for (std::uint32_t mask = 0; mask < table.size(); ++mask)
        if (std::popcount(mask) % 2 == 1) table[mask] = w;
    return from_table(k, std::move(table));
}

ClauseDistribution ClauseDistribution::noisy_parity3(double delta_prime) {
    if (!(delta_prime >= 0.0 && delta_prime <= 2.0))
        throw std::invalid_argument("delta' must be in [0, 2]");
    std::vector<double> table(8);
    for (std::uint32_t mask = 0; mask < 8; ++mask)
        table[mask] = (std::popcount(mask) % 2 == 0) ? delta_prime / 8.0
                                                     : (2.0 - delta_prime) / 8.0;
    return from_table(3, std::move(table));
}

double ClauseDistribution::fourier_coefficient(std::uint32_t subset_mask) const {
    if (subset_mask >= table_size()) throw std::out_of_range("subset mask out of range");
    return fourier_[subset_mask];
}

double ClauseDistribution::fourier_coefficient_direct(std::uint32_t subset_mask) const {
    if (subset_mask >= table_size()) throw std::out_of_range("subset mask out of range");
    double sum = 0.0;
    for (std::uint32_t y = 0; y < table_size(); ++y) {
        const int sign = (std::popcount(y & subset_mask) % 2 == 0) ? 1 : -1;
        sum += weights_[y] * sign;
    }
    return sum / static_cast<double>(table_size());
}

bool ClauseDistribution::is_uniform(double tolerance) const {
    for (std::uint32_t mask = 1; mask < table_size(); ++mask)
        if (std::fabs(fourier_[mask]) > tolerance) return false;
    return true;
}

ComplexityCertificate ClauseDistribution::complexity(double tolerance) const {
    return certificate_from_fourier(fourier_, k_, tolerance,
                                    "uniform distribution has no complexity certificate");
}

Predicate::Predicate(std::int32_t k, std::vector<std::uint8_t> truth_table)
    : k_(k), table_(std::move(truth_table)) {
    check_arity(k);
    if (table_.size() != (std::size_t{1} << k))
        throw std::invalid_argument("predicate table must have 2^k entries");
    for (const std::uint8_t b : table_)
        if (b > 1) throw std::invalid_argument("predicate entries must be bits");
    fourier_.assign(table_.begin(), table_.end());
    walsh_hadamard(fourier_);
    const double scale = 1.0 / static_cast<double>(table_.size());
    for (double& c : fourier_) c *= scale;
}

double Predicate::fourier_coefficient(std::uint32_t subset_mask) const {
    if (subset_mask >= table_.size()) throw std::out_of_range("subset mask out of range");
    return fourier_[subset_mask];
}

ComplexityCertificate Predicate::complexity(double tolerance) const {
    return certificate_from_fourier(fourier_, k_, tolerance,
                                    "constant predicate has no complexity certificate");
}

std::int32_t ModelConfig::k() const {
    if (distribution) return distribution->k();
    if (predicate) return predicate->k();
    throw std::logic_error("empty model config");
}

ModelConfig load_model_config(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& err) {
        throw std::invalid_argument(std::string("model config is not valid JSON: ") + err.what());
    }
    if (!doc.is_object() || !doc.contains("k") || !doc["k"].is_number_integer())
        throw std::invalid_argument("model config requires an integer \"k\" field");
    const auto k = doc["k"].get<std::int32_t>();
    check_arity(k);

    const int present = static_cast<int>(doc.contains("table")) +
                        static_cast<int>(doc.contains("symmetric")) +
                        static_cast<int>(doc.contains("predicate"));
    if (present != 1)
        throw std::invalid_argument(
            "model config must contain exactly one of \"table\", \"symmetric\", \"predicate\"");

    ModelConfig config;
    if (doc.contains("table")) {
        config.distribution = ClauseDistribution::from_table(k, doc["table"].get<std::vector<double>>());
    } else if (doc.contains("symmetric")) {
        config.distribution =
            ClauseDistribution::from_symmetric(k, doc["symmetric"].get<std::vector<double>>());
    } else {
        auto bits = doc["predicate"].get<std::vector<std::int32_t>>();
        std::vector<std::uint8_t> table;
        table.reserve(bits.size());
        for (const std::int32_t b : bits) {
            if (b != 0 && b != 1) throw std::invalid_argument("predicate entries must be 0 or 1");
            table.push_back(static_cast<std::uint8_t>(b));
        }
        config.predicate = Predicate(k, std::move(table));
    }
    return config;
}

ModelConfig load_model_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open model config: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return load_model_config(buffer.str());
}

}  // namespace plantedcsp
