#include "plantedcsp/experiments.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>
#include <string_view>
#include <thread>

#include "plantedcsp/calibration.hpp"
#include "plantedcsp/oracles.hpp"
#include "plantedcsp/planting.hpp"

namespace plantedcsp {

namespace {

std::string fmt(double v) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", v);
    return buffer;
}

template <typename Fn>
void parallel_trials(std::int32_t trials, std::int32_t threads, const Fn& per_trial) {
    if (threads <= 1) {
        for (std::int32_t t = 0; t < trials; ++t) per_trial(t);
        return;
    }
    std::atomic<std::int32_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (std::int32_t w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            while (true) {
                const std::int32_t t = next.fetch_add(1);
                if (t >= trials) break;
                per_trial(t);
            }
        });
    }
    for (std::thread& worker : pool) worker.join();
}

const ClauseDistribution& require_distribution(const ExperimentConfig& config) {
    if (!config.model.distribution)
        throw std::invalid_argument("experiment needs a clause-distribution model");
    return *config.model.distribution;
}

SolveOptions solve_options(const ExperimentConfig& config, std::uint64_t m) {
    SolveOptions options;
    options.m = m;
    options.rounds = config.rounds;
    options.max_restarts = config.max_restarts;
    return options;
}

}  // namespace

std::uint64_t resolve_budget(const ExperimentConfig& config, std::int32_t r) {
    if (config.m > 0) return config.m;
    double coef = 0.0;
    if (config.m_coef) {
        coef = *config.m_coef;
    } else if (r == 1) {
        coef = calibration::kRecoveryCoefR1;
    } else if (r == 2) {
        coef = calibration::kRecoveryCoefR2;
    } else if (r == 3) {
        coef = calibration::kRecoveryCoefR3;
    } else {
        throw std::invalid_argument("no default budget coefficient for r > 3; set m or m_coef");
    }
    if (config.n < 2) throw std::invalid_argument("budget rule needs n >= 2");
    const double nd = static_cast<double>(config.n);
    const double m = coef * std::pow(nd, static_cast<double>(r) / 2.0) * std::log(nd);
    if (m < 1.0 || m > 9e18) throw std::invalid_argument("resolved budget out of range");
    return static_cast<std::uint64_t>(std::ceil(m));
}

RecoveryResult run_recovery_experiment(const ExperimentConfig& config) {
    const ClauseDistribution& q = require_distribution(config);
    if (config.trials < 1) throw std::invalid_argument("need at least one trial");
    const std::int32_t r = q.complexity().r;
    const std::uint64_t m = resolve_budget(config, r);
    const Rng base(config.seed);

    RecoveryResult result;
    result.rows.assign(static_cast<std::size_t>(config.trials), RecoveryTrialRow{});
    parallel_trials(config.trials, config.threads, [&](std::int32_t t) {
        const std::uint64_t stream_id = 4 * static_cast<std::uint64_t>(t);
        Rng sigma_rng = base.derive(stream_id);
        Rng stream_rng = base.derive(stream_id + 1);
        Rng solver_rng = base.derive(stream_id + 2);
        Rng session_rng = base.derive(stream_id + 3);

        const Assignment sigma = random_assignment(config.n, sigma_rng);
        const PlantedModel model(q, sigma);
        const SolveOptions options = solve_options(config, m);

        SolveReport report;
        if (config.mode == SolveMode::direct) {
            ClauseStream stream(model, stream_rng);
            report = solve_from_stream(q, stream, options, solver_rng, &sigma);
        } else {
            auto stream = std::make_shared<ClauseStream>(model, stream_rng);
            OracleSession<Clause> session(stream, 1, session_rng);
            session.set_transcript_enabled(false);
            report = solve_via_oracle(q, session, options, solver_rng, &sigma);
        }

        RecoveryTrialRow& row = result.rows[static_cast<std::size_t>(t)];
        row.trial = t;
        row.seed = config.seed;
        row.n = report.n;
        row.k = report.k;
        row.r = report.r;
        row.m = m;
        row.mode = config.mode == SolveMode::direct ? "direct" : "oracle";
        row.success = report.success;
        row.recovered = report.recovered;
        row.agreement = report.agreement_fraction;
        row.tie_class_size = report.tie_class_size;
        row.queries = report.queries;
        row.iterations = report.iterations;
        row.wall_ms = report.wall_ms;
    });

    std::int32_t recovered = 0;
    for (const RecoveryTrialRow& row : result.rows) recovered += row.recovered ? 1 : 0;
    result.recovery_rate = static_cast<double>(recovered) / static_cast<double>(config.trials);
    return result;
}

DistinguishResult run_distinguish_experiment(const ExperimentConfig& config) {
    const ClauseDistribution& q = require_distribution(config);
    if (config.trials < 1) throw std::invalid_argument("need at least one trial");
    const ComplexityCertificate cert = q.complexity();
    const ParityChannel channel = subsample_to_parity(q, cert);
    const std::uint64_t m = resolve_budget(config, cert.r);
    const double threshold =
        calibration::kDistinguishThreshold * std::sqrt(static_cast<double>(m));
    const Rng base(config.seed);

    DistinguishResult result;
    result.rows.assign(2 * static_cast<std::size_t>(config.trials), DistinguishTrialRow{});
    parallel_trials(config.trials, config.threads, [&](std::int32_t t) {
        const std::uint64_t stream_id = 4 * static_cast<std::uint64_t>(t);
        Rng sigma_rng = base.derive(stream_id);
        Rng planted_rng = base.derive(stream_id + 1);
        Rng uniform_rng = base.derive(stream_id + 2);
        Rng ref_rng = base.derive(stream_id + 3);

        auto parity_statistic = [&](ClauseStream& stream, const Assignment& reference) {
            double statistic = 0.0;
            for (std::uint64_t i = 0; i < m; ++i) {
                const Clause r_clause = channel.restrict(stream.next());
                const int trues = std::popcount(evaluate_pattern(reference, r_clause));
                statistic += (trues % 2 == 0) ? 1.0 : -1.0;
            }
            return statistic;
        };

        auto fill = [&](DistinguishTrialRow& row, const char* source, double statistic,
                        bool is_planted) {
            row.trial = t;
            row.source = source;
            row.n = config.n;
            row.k = q.k();
            row.r = cert.r;
            row.m = m;
            row.statistic = statistic;
            row.threshold = threshold;
            row.decided_planted = std::fabs(statistic) > threshold;
            row.correct = row.decided_planted == is_planted;
        };

        const Assignment sigma = random_assignment(config.n, sigma_rng);
        const PlantedModel model(q, sigma);
        ClauseStream planted_stream(model, planted_rng);
        fill(result.rows[2 * static_cast<std::size_t>(t)], "planted",
             parity_statistic(planted_stream, sigma), true);

        const Assignment reference = random_assignment(config.n, ref_rng);
        ClauseStream uniform_stream(config.n, q.k(), uniform_rng);
        fill(result.rows[2 * static_cast<std::size_t>(t) + 1], "uniform",
             parity_statistic(uniform_stream, reference), false);
    });

    std::int32_t correct = 0;
    for (const DistinguishTrialRow& row : result.rows) correct += row.correct ? 1 : 0;
    result.accuracy = static_cast<double>(correct) / static_cast<double>(result.rows.size());
    return result;
}

std::vector<SweepPoint> run_recovery_sweep(const ExperimentConfig& base,
                                           const std::vector<double>& coefs) {
    const ClauseDistribution& q = require_distribution(base);
    const std::int32_t r = q.complexity().r;
    std::vector<SweepPoint> points;
    points.reserve(coefs.size());
    for (const double coef : coefs) {
        ExperimentConfig config = base;
        config.m = 0;
        config.m_coef = coef;
        const RecoveryResult result = run_recovery_experiment(config);
        SweepPoint point;
        point.coef = coef;
        point.m = resolve_budget(config, r);
        point.trials = base.trials;
        for (const RecoveryTrialRow& row : result.rows) point.successes += row.recovered ? 1 : 0;
        point.rate = static_cast<double>(point.successes) / static_cast<double>(point.trials);
        points.push_back(point);
    }
    return points;
}

std::string recovery_csv(const RecoveryResult& result) {
    std::string out = "# plantedcsp recovery v1\n";
    out += "trial,seed,n,k,r,m,mode,success,recovered,agreement,tie_class_size,queries,"
           "iterations,wall_ms\n";
    for (const RecoveryTrialRow& row : result.rows) {
        out += std::to_string(row.trial) + ',' + std::to_string(row.seed) + ',' +
               std::to_string(row.n) + ',' + std::to_string(row.k) + ',' + std::to_string(row.r) +
               ',' + std::to_string(row.m) + ',' + row.mode + ',' + (row.success ? "1" : "0") +
               ',' + (row.recovered ? "1" : "0") + ',' + fmt(row.agreement) + ',' +
               std::to_string(row.tie_class_size) + ',' + std::to_string(row.queries) + ',' +
               std::to_string(row.iterations) + ',' + fmt(row.wall_ms) + '\n';
    }
    return out;
}

std::string distinguish_csv(const DistinguishResult& result) {
    std::string out = "# plantedcsp distinguish v1\n";
    out += "trial,source,n,k,r,m,statistic,threshold,decided_planted,correct\n";
    for (const DistinguishTrialRow& row : result.rows) {
        out += std::to_string(row.trial) + ',' + row.source + ',' + std::to_string(row.n) + ',' +
               std::to_string(row.k) + ',' + std::to_string(row.r) + ',' + std::to_string(row.m) +
               ',' + fmt(row.statistic) + ',' + fmt(row.threshold) + ',' +
               (row.decided_planted ? "1" : "0") + ',' + (row.correct ? "1" : "0") + '\n';
    }
    return out;
}

std::string sweep_csv(const std::vector<SweepPoint>& points) {
    std::string out = "# plantedcsp sweep v1\n";
    out += "coef,m,successes,trials,rate\n";
    for (const SweepPoint& point : points) {
        out += fmt(point.coef) + ',' + std::to_string(point.m) + ',' +
               std::to_string(point.successes) + ',' + std::to_string(point.trials) + ',' +
               fmt(point.rate) + '\n';
    }
    return out;
}

std::string strip_wall_ms(const std::string& csv) {
    std::string out;
    out.reserve(csv.size());
    std::size_t start = 0;
    while (start < csv.size()) {
        std::size_t end = csv.find('\n', start);
        if (end == std::string::npos) end = csv.size();
        std::string_view line(csv.data() + start, end - start);
        const std::size_t comma = line.rfind(',');
        if (!line.empty() && line[0] != '#' && comma != std::string_view::npos)
            line = line.substr(0, comma);
        out.append(line);
        out.push_back('\n');
        start = end + 1;
    }
    return out;
}

}  // namespace plantedcsp
