#pragma once

// Batch experiment drivers behind the CLI: planted-recovery trials (direct or
// statistical mode), the planted-vs-uniform distinguishing experiment, and
// budget sweeps. Every trial derives its own RNG streams from the base seed,
// so results are reproducible for a fixed config regardless of thread count;
// CSV output is byte-identical across reruns except for wall-clock columns.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "plantedcsp/distribution.hpp"
#include "plantedcsp/solver.hpp"

namespace plantedcsp {

enum class SolveMode { direct, oracle };

struct ExperimentConfig {
    ModelConfig model;
    std::int32_t n = 0;
    std::uint64_t m = 0;           // explicit clause budget; 0 defers to m_coef
    std::optional<double> m_coef;  // m = ceil(coef * n^{r/2} * ln n)
    std::int32_t trials = 20;
    std::uint64_t seed = 1;
    SolveMode mode = SolveMode::direct;
    std::optional<std::int32_t> rounds;
    std::int32_t max_restarts = 0;
    std::int32_t threads = 1;
};

// Budget from m or m_coef for a source of complexity r.
std::uint64_t resolve_budget(const ExperimentConfig& config, std::int32_t r);

struct RecoveryTrialRow {
    std::int32_t trial = 0;
    std::uint64_t seed = 0;
    std::int32_t n = 0, k = 0, r = 0;
    std::uint64_t m = 0;
    std::string mode;
    bool success = false;
    bool recovered = false;
    double agreement = 0.0;
    std::size_t tie_class_size = 0;
    std::uint64_t queries = 0;
    std::int32_t iterations = 0;
    double wall_ms = 0.0;
};

struct RecoveryResult {
    std::vector<RecoveryTrialRow> rows;
    double recovery_rate = 0.0;  // fraction of trials with the planted assignment in the tie class
};

RecoveryResult run_recovery_experiment(const ExperimentConfig& config);

struct DistinguishTrialRow {
    std::int32_t trial = 0;
    std::string source;  // "planted" or "uniform"
    std::int32_t n = 0, k = 0, r = 0;
    std::uint64_t m = 0;
    double statistic = 0.0;
    double threshold = 0.0;
    bool decided_planted = false;
    bool correct = false;
};

struct DistinguishResult {
    std::vector<DistinguishTrialRow> rows;  // config.trials of each source
    double accuracy = 0.0;
};

// Parity statistic T = sum of (-1)^{#TRUE under the reference assignment}
// over m channel-subsampled clauses; planted is declared when
// |T| > threshold * sqrt(m). The reference assignment is the planted one on
// planted trials and a fresh random one on uniform trials.
DistinguishResult run_distinguish_experiment(const ExperimentConfig& config);

struct SweepPoint {
    double coef = 0.0;
    std::uint64_t m = 0;
    std::int32_t successes = 0;
    std::int32_t trials = 0;
    double rate = 0.0;
};

// Recovery success rate across a grid of budget coefficients.
std::vector<SweepPoint> run_recovery_sweep(const ExperimentConfig& base,
                                           const std::vector<double>& coefs);

std::string recovery_csv(const RecoveryResult& result);
std::string distinguish_csv(const DistinguishResult& result);
std::string sweep_csv(const std::vector<SweepPoint>& points);

// Drops the trailing wall_ms column from every line; reruns of the same
// config must agree byte-for-byte on the stripped text.
std::string strip_wall_ms(const std::string& csv);

}  // namespace plantedcsp
