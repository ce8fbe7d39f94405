// Command-line front end: instance generation, source analysis, recovery runs
// (direct or through simulated statistical oracles), scripted oracle sessions,
// the identity/norm laboratory, and budget sweeps.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "plantedcsp/calibration.hpp"
#include "plantedcsp/dimacs.hpp"
#include "plantedcsp/experiments.hpp"
#include "plantedcsp/oracles.hpp"
#include "plantedcsp/planting.hpp"
#include "plantedcsp/solver.hpp"
#include "plantedcsp/theory_lab.hpp"

using namespace plantedcsp;
using nlohmann::json;

namespace {

// --model accepts a JSON file path or a builtin shorthand:
//   sat:K        planted uniform K-SAT
//   xor:K        planted K-XOR
//   noisy3:D     noisy 3-parity with retention parameter D
//   sym:K:v0,... symmetric per-string table (K+1 values)
ModelConfig parse_model_arg(const std::string& arg) {
    auto split = [](const std::string& text, char sep) {
        std::vector<std::string> parts;
        std::istringstream in(text);
        std::string part;
        while (std::getline(in, part, sep)) parts.push_back(part);
        return parts;
    };
    ModelConfig config;
    if (arg.rfind("sat:", 0) == 0) {
        config.distribution = ClauseDistribution::planted_uniform_sat(std::stoi(arg.substr(4)));
        return config;
    }
    if (arg.rfind("xor:", 0) == 0) {
        config.distribution = ClauseDistribution::planted_xor(std::stoi(arg.substr(4)));
        return config;
    }
    if (arg.rfind("noisy3:", 0) == 0) {
        config.distribution = ClauseDistribution::noisy_parity3(std::stod(arg.substr(7)));
        return config;
    }
    if (arg.rfind("sym:", 0) == 0) {
        const std::vector<std::string> parts = split(arg.substr(4), ':');
        if (parts.size() != 2) throw std::invalid_argument("expected sym:K:v0,v1,...");
        std::vector<double> values;
        for (const std::string& v : split(parts[1], ',')) values.push_back(std::stod(v));
        config.distribution = ClauseDistribution::from_symmetric(std::stoi(parts[0]), values);
        return config;
    }
    return load_model_config_file(arg);
}

std::uint64_t resolve_seed(std::uint64_t cli_seed) {
    if (const char* env = std::getenv("PLANTEDCSP_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end == env || *end != '\0')
            throw std::invalid_argument("PLANTEDCSP_SEED must be an unsigned integer");
        return v;
    }
    return cli_seed;
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + out_path + " for writing");
    out << text;
}

json assignment_to_json(const Assignment& sigma) {
    json arr = json::array();
    for (const std::int8_t v : sigma) arr.push_back(static_cast<int>(v));
    return arr;
}

Assignment assignment_from_json(const json& arr, std::int32_t n) {
    if (!arr.is_array() || static_cast<std::int32_t>(arr.size()) != n)
        throw std::invalid_argument("sigma must be an array of n entries of +-1");
    Assignment sigma(static_cast<std::size_t>(n));
    for (std::int32_t v = 0; v < n; ++v) {
        const int value = arr[static_cast<std::size_t>(v)].get<int>();
        if (value != 1 && value != -1) throw std::invalid_argument("sigma entries must be +-1");
        sigma[static_cast<std::size_t>(v)] = static_cast<std::int8_t>(value);
    }
    return sigma;
}

json clause_to_json(const Clause& clause) {
    json arr = json::array();
    for (const Literal lit : clause) {
        const std::int32_t v = lit.variable + 1;
        arr.push_back(lit.negated ? -v : v);
    }
    return arr;
}

int cmd_gen(const std::string& model_arg, std::int32_t n, std::uint64_t m, std::uint64_t seed,
            const std::string& out_path, const std::string& format) {
    const ModelConfig model = parse_model_arg(model_arg);
    Rng sigma_rng = Rng(seed).derive(0);
    Rng sample_rng = Rng(seed).derive(1);
    const Assignment sigma = random_assignment(n, sigma_rng);

    if (model.is_predicate()) {
        if (format == "dimacs")
            throw std::invalid_argument("predicate models generate labeled tuples, not CNF");
        const PlantedModel planted(*model.predicate, sigma);
        json samples = json::array();
        for (std::uint64_t i = 0; i < m; ++i) {
            const GoldreichSample s = sample_goldreich(planted, sample_rng);
            json vars = json::array();
            for (const std::int32_t v : s.variables) vars.push_back(v + 1);
            samples.push_back(json{{"vars", vars}, {"label", static_cast<int>(s.label)}});
        }
        json doc{{"schema_version", 1},
                 {"n", n},       {"k", model.k()},
                 {"m", m},       {"seed", seed},
                 {"sigma", assignment_to_json(sigma)}, {"samples", samples}};
        emit(doc.dump(2) + "\n", out_path);
        return 0;
    }

    const PlantedModel planted(*model.distribution, sigma);
    Formula formula;
    formula.reserve(m);
    for (std::uint64_t i = 0; i < m; ++i) formula.push_back(sample_planted_clause(planted, sample_rng));

    if (format == "dimacs") {
        const std::string text = to_dimacs(formula, n);
        if (out_path.empty()) {
            std::cout << text;
        } else {
            emit(text, out_path);
            json meta{{"schema_version", 1},
                      {"n", n},
                      {"k", model.k()},
                      {"m", m},
                      {"seed", seed},
                      {"sigma", assignment_to_json(sigma)},
                      {"instance", out_path}};
            std::cout << meta.dump(2) << "\n";
        }
        return 0;
    }
    json clauses = json::array();
    for (const Clause& clause : formula) clauses.push_back(clause_to_json(clause));
    json doc{{"schema_version", 1},
             {"n", n},       {"k", model.k()},
             {"m", m},       {"seed", seed},
             {"sigma", assignment_to_json(sigma)}, {"clauses", clauses}};
    emit(doc.dump(2) + "\n", out_path);
    return 0;
}

int cmd_analyze(const std::string& model_arg, const std::string& out_path) {
    const ModelConfig model = parse_model_arg(model_arg);
    json doc;
    doc["schema_version"] = 1;
    doc["k"] = model.k();
    if (model.is_predicate()) {
        const Predicate& p = *model.predicate;
        doc["kind"] = "predicate";
        json table = json::array();
        for (const std::uint8_t b : p.table()) table.push_back(static_cast<int>(b));
        doc["table"] = table;
        try {
            const ComplexityCertificate cert = p.complexity();
            doc["r"] = cert.r;
            doc["witness"] = cert.witness;
            doc["coefficient"] = cert.coefficient;
        } catch (const UniformDistributionError&) {
            doc["uniform"] = true;
        }
        emit(doc.dump(2) + "\n", out_path);
        return 0;
    }
    const ClauseDistribution& q = *model.distribution;
    doc["kind"] = "distribution";
    doc["weights"] = q.weights();
    doc["fourier"] = q.fourier();
    doc["is_uniform"] = q.is_uniform();
    if (q.is_uniform()) {
        emit(doc.dump(2) + "\n", out_path);
        return 0;
    }
    const ComplexityCertificate cert = q.complexity();
    doc["r"] = cert.r;
    doc["witness"] = cert.witness;
    doc["coefficient"] = cert.coefficient;
    const ParityChannel channel = subsample_to_parity(q, cert);
    doc["channel"] = json{{"delta", channel.delta}, {"marginal", channel.marginal}};
    emit(doc.dump(2) + "\n", out_path);
    return 0;
}

ExperimentConfig build_config(const std::string& model_arg, std::int32_t n, std::uint64_t m,
                              std::optional<double> m_coef, std::int32_t trials,
                              std::uint64_t seed, const std::string& mode,
                              std::int32_t max_restarts, std::int32_t threads) {
    ExperimentConfig config;
    config.model = parse_model_arg(model_arg);
    config.n = n;
    config.m = m;
    config.m_coef = m_coef;
    config.trials = trials;
    config.seed = seed;
    config.max_restarts = max_restarts;
    config.threads = threads;
    if (mode == "direct")
        config.mode = SolveMode::direct;
    else if (mode == "oracle")
        config.mode = SolveMode::oracle;
    else
        throw std::invalid_argument("mode must be direct or oracle");
    return config;
}

int cmd_solve(const ExperimentConfig& config, const std::string& out_path,
              const std::string& format) {
    if (config.trials == 1 && format == "json") {
        // Single-trial path: emit the full report, deriving the same RNG
        // streams the batch driver would use for trial 0.
        const ClauseDistribution& q = *config.model.distribution;
        const Rng base(config.seed);
        Rng sigma_rng = base.derive(0);
        Rng stream_rng = base.derive(1);
        Rng solver_rng = base.derive(2);
        Rng session_rng = base.derive(3);
        const Assignment sigma = random_assignment(config.n, sigma_rng);
        const PlantedModel model(q, sigma);
        SolveOptions options;
        options.m = resolve_budget(config, q.complexity().r);
        options.rounds = config.rounds;
        options.max_restarts = config.max_restarts;
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
        emit(report.to_json() + "\n", out_path);
        return report.success ? 0 : 1;
    }
    const RecoveryResult result = run_recovery_experiment(config);
    if (format == "csv") {
        emit(recovery_csv(result), out_path);
    } else {
        json doc;
        doc["schema_version"] = 1;
        doc["recovery_rate"] = result.recovery_rate;
        doc["trials"] = config.trials;
        json rows = json::array();
        for (const auto& row : result.rows) {
            json r;
            r["trial"] = row.trial;
            r["seed"] = row.seed;
            r["n"] = row.n;
            r["k"] = row.k;
            r["r"] = row.r;
            r["m"] = row.m;
            r["mode"] = row.mode;
            r["success"] = row.success;
            r["recovered"] = row.recovered;
            r["agreement"] = row.agreement;
            r["tie_class_size"] = row.tie_class_size;
            r["queries"] = row.queries;
            r["iterations"] = row.iterations;
            r["wall_ms"] = row.wall_ms;
            rows.push_back(std::move(r));
        }
        doc["rows"] = std::move(rows);
        emit(doc.dump(2) + "\n", out_path);
    }
    return 0;
}

QueryFunction<Clause> parse_query_function(const json& spec, std::int32_t k,
                                           const Assignment& sigma) {
    const std::string type = spec.at("type").get<std::string>();
    if (type == "pattern") {
        Assignment ref = sigma;
        if (spec.contains("sigma"))
            ref = assignment_from_json(spec.at("sigma"), static_cast<std::int32_t>(sigma.size()));
        return QueryFunction<Clause>(1 << k, [ref](const Clause& c) {
            return static_cast<std::int32_t>(evaluate_pattern(ref, c));
        });
    }
    if (type == "pattern_indicator") {
        const auto target = spec.at("pattern").get<std::uint32_t>();
        Assignment ref = sigma;
        if (spec.contains("sigma"))
            ref = assignment_from_json(spec.at("sigma"), static_cast<std::int32_t>(sigma.size()));
        return QueryFunction<Clause>(2, [ref, target](const Clause& c) {
            return evaluate_pattern(ref, c) == target ? 1 : 0;
        });
    }
    if (type == "literal_negated") {
        const auto position = spec.at("position").get<std::size_t>();
        return QueryFunction<Clause>(2, [position](const Clause& c) {
            return c.at(position).negated ? 1 : 0;
        });
    }
    throw std::invalid_argument("unknown query type: " + type);
}

int cmd_oracle(const std::string& script_path, const std::string& out_path) {
    std::ifstream in(script_path);
    if (!in) throw std::runtime_error("cannot open " + script_path);
    json script = json::parse(in);

    const auto n = script.at("n").get<std::int32_t>();
    const auto t = script.value("t", std::uint64_t{1000});
    const auto seed = resolve_seed(script.value("seed", std::uint64_t{1}));
    const std::string mode = script.value("mode", std::string("honest"));
    const ModelConfig model = [&] {
        const json& m = script.at("model");
        if (m.is_string()) return parse_model_arg(m.get<std::string>());
        ModelConfig cfg = load_model_config(m.dump());
        return cfg;
    }();
    if (model.is_predicate()) throw std::invalid_argument("oracle scripts drive clause sources");
    const std::int32_t k = model.k();

    const Rng base(seed);
    Rng sigma_rng = base.derive(0);
    Rng stream_rng = base.derive(1);
    Rng session_rng = base.derive(2);
    Assignment sigma = script.contains("sigma")
                           ? assignment_from_json(script.at("sigma"), n)
                           : random_assignment(n, sigma_rng);

    auto source = std::make_shared<ClauseStream>(PlantedModel(*model.distribution, sigma),
                                                 stream_rng);
    std::optional<OracleSession<Clause>> session;
    if (mode == "honest") {
        session.emplace(source, t, session_rng);
    } else if (mode == "adversarial") {
        auto reference = std::make_shared<ClauseStream>(n, k, base.derive(3));
        session.emplace(source, reference, t, session_rng);
    } else {
        throw std::invalid_argument("mode must be honest or adversarial");
    }
    if (script.contains("budget"))
        session->set_sample_budget(script.at("budget").get<std::uint64_t>());

    json answers = json::array();
    for (const json& entry : script.at("queries")) {
        const std::string kind = entry.at("kind").get<std::string>();
        const QueryFunction<Clause> h = parse_query_function(entry.at("h"), k, sigma);
        if (kind == "1-STAT") {
            answers.push_back(session->query_1stat(h));
        } else if (kind == "1-MSTAT") {
            answers.push_back(session->query_1mstat(h));
        } else if (kind == "VSTAT") {
            answers.push_back(session->query_vstat(h));
        } else if (kind == "MVSTAT") {
            SubsetSpec spec;
            for (const json& set : entry.at("sets"))
                spec.sets.push_back(set.get<std::vector<std::int32_t>>());
            answers.push_back(session->query_mvstat(h, spec));
        } else {
            throw std::invalid_argument("unknown query kind: " + kind);
        }
    }

    json doc;
    doc["schema_version"] = 1;
    doc["answers"] = answers;
    doc["samples_consumed"] = session->samples_consumed();
    doc["oracle_query_cost"] = session->oracle_query_cost();
    std::cout << doc.dump(2) << "\n";
    if (!out_path.empty()) {
        std::ofstream transcript(out_path, std::ios::binary);
        if (!transcript) throw std::runtime_error("cannot open " + out_path + " for writing");
        write_transcript_jsonl(session->transcript(), transcript);
    }
    return 0;
}

int cmd_lab(const std::string& model_arg, std::int32_t n, std::int32_t trials, std::uint64_t seed,
            double kappa, const std::string& out_path) {
    const ModelConfig model = parse_model_arg(model_arg);
    std::string csv = "# plantedcsp lab v1\n";
    csv += "n,k,r,quantity,value,bound,trial_seed\n";
    auto fmt = [](double v) {
        char buffer[64];
        std::snprintf(buffer, sizeof(buffer), "%.17g", v);
        return std::string(buffer);
    };
    const Rng base(seed);

    const std::int32_t k = model.k();
    std::int32_t r = 0;
    if (model.is_predicate()) {
        r = model.predicate->complexity().r;
        for (std::int32_t trial = 0; trial < trials; ++trial) {
            Rng rng = base.derive(static_cast<std::uint64_t>(trial));
            const Assignment sigma = random_assignment(n, rng);
            const LabeledQueryVector h = LabeledQueryVector::random(n, k, rng);
            const DecompositionCheck check =
                check_decomposition_goldreich(*model.predicate, sigma, h);
            csv += std::to_string(n) + ',' + std::to_string(k) + ',' + std::to_string(r) +
                   ",decomposition_residual," + fmt(check.residual) + ",1e-09," +
                   std::to_string(seed + static_cast<std::uint64_t>(trial)) + '\n';
        }
        emit(csv, out_path);
        return 0;
    }

    const ClauseDistribution& q = *model.distribution;
    r = q.complexity().r;
    for (std::int32_t trial = 0; trial < trials; ++trial) {
        Rng rng = base.derive(static_cast<std::uint64_t>(trial));
        const Assignment sigma = random_assignment(n, rng);
        const QueryVector h = QueryVector::random(n, k, rng);
        const DecompositionCheck check = check_decomposition(q, sigma, h);
        csv += std::to_string(n) + ',' + std::to_string(k) + ',' + std::to_string(r) +
               ",decomposition_residual," + fmt(check.residual) + ",1e-09," +
               std::to_string(seed + static_cast<std::uint64_t>(trial)) + '\n';

        const QueryVector g = QueryVector::random(n, r, rng);
        const double gap = std::fabs(gamma_expectation(sigma, g) - gamma_polynomial(sigma, g));
        csv += std::to_string(n) + ',' + std::to_string(k) + ',' + std::to_string(r) +
               ",gamma_route_gap," + fmt(gap) + ",1e-12," +
               std::to_string(seed + static_cast<std::uint64_t>(trial)) + '\n';
    }
    const double full = discrimination_norm_full(q, n);
    csv += std::to_string(n) + ',' + std::to_string(k) + ',' + std::to_string(r) +
           ",kappa2_full," + fmt(full) + ',' + fmt(kappa) + ',' + std::to_string(seed) + '\n';
    Rng probe_rng = base.derive(1'000'000);
    const SdnReport sdn = sdn_probe(q, n, kappa > 0.0 ? kappa : full, {1, 16, 64, 256},
                                    std::max(trials, 1), probe_rng);
    csv += std::to_string(n) + ',' + std::to_string(k) + ',' + std::to_string(r) +
           ",sdn_largest_q," + fmt(static_cast<double>(sdn.largest_passing_q)) + ',' +
           fmt(sdn.kappa) + ',' + std::to_string(seed) + '\n';
    emit(csv, out_path);
    return 0;
}

int cmd_bench(const ExperimentConfig& config, const std::string& kind, const std::string& coefs,
              const std::string& out_path) {
    if (kind == "distinguish") {
        const DistinguishResult result = run_distinguish_experiment(config);
        emit(distinguish_csv(result), out_path);
        std::cerr << "accuracy " << result.accuracy << "\n";
        return 0;
    }
    std::vector<double> grid;
    {
        std::istringstream in(coefs);
        std::string part;
        while (std::getline(in, part, ',')) grid.push_back(std::stod(part));
    }
    if (grid.empty()) throw std::invalid_argument("--coefs must list at least one value");
    const std::vector<SweepPoint> points = run_recovery_sweep(config, grid);
    emit(sweep_csv(points), out_path);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"planted k-CSP toolkit: generation, analysis, recovery, oracles"};
    app.require_subcommand(1);

    std::string model_arg;
    std::string out_path;
    std::string format = "dimacs";
    std::string mode = "direct";
    std::string script_path;
    std::string kind = "sweep";
    std::string coefs = "1,2,4,8,16,32,64";
    std::int32_t n = 0;
    std::uint64_t m = 0;
    double m_coef = 0.0;
    std::int32_t trials = 1;
    std::uint64_t seed = 1;
    std::int32_t max_restarts = 0;
    std::int32_t threads = 1;
    double kappa = 0.0;

    auto* gen = app.add_subcommand("gen", "sample a planted instance");
    gen->add_option("--model", model_arg)->required();
    gen->add_option("--n", n)->required();
    gen->add_option("--m", m)->required();
    gen->add_option("--seed", seed);
    gen->add_option("--out", out_path);
    gen->add_option("--format", format)->check(CLI::IsMember({"dimacs", "json"}));

    auto* analyze = app.add_subcommand("analyze", "source complexity and channel");
    analyze->add_option("--model", model_arg)->required();
    analyze->add_option("--out", out_path);

    auto* solve = app.add_subcommand("solve", "recover planted assignments");
    solve->add_option("--model", model_arg)->required();
    solve->add_option("--n", n)->required();
    solve->add_option("--m", m);
    solve->add_option("--m-coef", m_coef);
    solve->add_option("--trials", trials);
    solve->add_option("--seed", seed);
    solve->add_option("--mode", mode)->check(CLI::IsMember({"direct", "oracle"}));
    solve->add_option("--max-restarts", max_restarts);
    solve->add_option("--threads", threads);
    solve->add_option("--out", out_path);
    std::string solve_format = "json";
    solve->add_option("--format", solve_format)->check(CLI::IsMember({"json", "csv"}));

    auto* oracle = app.add_subcommand("oracle", "run a scripted oracle session");
    oracle->add_option("--script", script_path)->required();
    oracle->add_option("--out", out_path);

    auto* lab = app.add_subcommand("lab", "identity checks and norm probes");
    lab->add_option("--model", model_arg)->required();
    lab->add_option("--n", n)->required();
    lab->add_option("--trials", trials);
    lab->add_option("--seed", seed);
    lab->add_option("--kappa", kappa);
    lab->add_option("--out", out_path);

    auto* bench = app.add_subcommand("bench", "budget sweeps and distinguishing runs");
    bench->add_option("--model", model_arg)->required();
    bench->add_option("--n", n)->required();
    bench->add_option("--kind", kind)->check(CLI::IsMember({"sweep", "distinguish"}));
    bench->add_option("--coefs", coefs);
    bench->add_option("--m", m);
    bench->add_option("--m-coef", m_coef);
    bench->add_option("--trials", trials);
    bench->add_option("--seed", seed);
    bench->add_option("--mode", mode)->check(CLI::IsMember({"direct", "oracle"}));
    bench->add_option("--threads", threads);
    bench->add_option("--out", out_path);

    CLI11_PARSE(app, argc, argv);

    try {
        seed = resolve_seed(seed);
        const std::optional<double> coef_opt =
            m_coef > 0.0 ? std::optional<double>(m_coef) : std::nullopt;
        if (*gen) return cmd_gen(model_arg, n, m, seed, out_path, format);
        if (*analyze) return cmd_analyze(model_arg, out_path);
        if (*solve) {
            return cmd_solve(build_config(model_arg, n, m, coef_opt, trials, seed, mode,
                                          max_restarts, threads),
                             out_path, solve_format);
        }
        if (*oracle) return cmd_oracle(script_path, out_path);
        if (*lab) return cmd_lab(model_arg, n, trials, seed, kappa, out_path);
        if (*bench) {
            return cmd_bench(build_config(model_arg, n, m, coef_opt, trials, seed, mode,
                                          max_restarts, threads),
                             kind, coefs, out_path);
        }
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    }
    return 0;
}
