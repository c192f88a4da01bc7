// Command-line front end: synthetic ensemble generation, Gibbs fitting,
// hypothesis scoring/ranking, entropy evaluation and the Bloch-ball
// posterior demo, all as file-based reproducible workflows.
//
// Exit codes: 0 success, 1 input/usage errors, 2 infeasible or
// non-convergent fits. Diagnostics go to stderr.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gibbsfit/json_io.hpp"

namespace fs = std::filesystem;
using namespace gibbsfit;

namespace {

// Advisory guard against two runs writing the same output directory.
class DirectoryLock {
public:
    explicit DirectoryLock(const fs::path& dir) : lock_path_(dir / ".gibbsfit.lock") {
        if (fs::exists(lock_path_)) {
            throw std::runtime_error("output directory '" + dir.string() +
                                     "' is locked by another run (remove " + lock_path_.string() +
                                     " if that run is gone)");
        }
        std::ofstream out(lock_path_);
        if (!out) {
            throw std::runtime_error("cannot create lockfile " + lock_path_.string());
        }
        out << "locked\n";
    }
    ~DirectoryLock() {
        std::error_code ec;
        fs::remove(lock_path_, ec);
    }
    DirectoryLock(const DirectoryLock&) = delete;
    DirectoryLock& operator=(const DirectoryLock&) = delete;

private:
    fs::path lock_path_;
};

void require_distinct_paths(const std::vector<fs::path>& paths) {
    std::set<std::string> seen;
    for (const fs::path& p : paths) {
        if (p.empty()) continue;
        if (!seen.insert(fs::weakly_canonical(p).string()).second) {
            throw std::runtime_error("input and output paths must be distinct: " + p.string());
        }
    }
}

DensityMatrix load_sigma_or_mixed(const std::string& path, int dim) {
    if (path.empty()) return DensityMatrix::maximally_mixed(dim);
    return state_from_json(load_json_file(path));
}

struct EnsembleOnDisk {
    ObservableSet measurement;
    ObservableSet family;
    DensityMatrix sigma;
    std::vector<SampleRecord> records;
};

EnsembleOnDisk load_ensemble(const fs::path& dir) {
    const Json manifest = load_json_file(dir / "manifest.json");
    for (const std::string required : {"measurement", "family", "sigma", "samples"}) {
        if (!manifest.contains(required)) {
            throw std::runtime_error("manifest.json: missing '" + required + "'");
        }
    }
    ObservableSet measurement = observables_from_json(manifest.at("measurement"));
    ObservableSet family = observables_from_json(manifest.at("family"));
    DensityMatrix sigma = state_from_json(manifest.at("sigma"));
    std::vector<SampleRecord> records;
    for (const Json& name : manifest.at("samples")) {
        records.push_back(
            sample_record_from_json(load_json_file(dir / name.get<std::string>()), measurement));
    }
    return EnsembleOnDisk{std::move(measurement), std::move(family), std::move(sigma),
                          std::move(records)};
}

int run_gen(const std::string& spec_path, const std::string& out_dir,
            std::optional<std::uint64_t> seed_override) {
    EnsembleSpec spec = ensemble_spec_from_json(load_json_file(spec_path));
    if (seed_override) spec.seed = *seed_override;

    fs::create_directories(out_dir);
    DirectoryLock lock{fs::path(out_dir)};
    const std::vector<SampleRecord> records = generate_ensemble(spec);

    Json sample_names = Json::array();
    for (const SampleRecord& record : records) {
        const std::string name = record.id + ".json";
        save_json_file(fs::path(out_dir) / name, sample_record_to_json(record));
        sample_names.push_back(name);
    }
    Json manifest{{"seed", spec.seed},
                  {"count", records.size()},
                  {"sigma", state_to_json(spec.sigma)},
                  {"family", observables_to_json(spec.family)},
                  {"measurement", observables_to_json(spec.measurement_set)},
                  {"sizes", spec.sizes},
                  {"samples", std::move(sample_names)}};
    save_json_file(fs::path(out_dir) / "manifest.json", manifest);
    std::cerr << "gen: wrote " << records.size() << " samples to " << out_dir << "\n";
    return 0;
}

int run_fit(const std::string& observables_path, const std::vector<double>& targets,
            const std::string& sigma_path, const std::string& out_path, double tolerance) {
    const ObservableSet observables = observables_from_json(load_json_file(observables_path));
    if (static_cast<int>(targets.size()) != observables.size()) {
        throw std::runtime_error("fit: got " + std::to_string(targets.size()) + " targets for " +
                                 std::to_string(observables.size()) + " observables");
    }
    Eigen::VectorXd t(static_cast<Eigen::Index>(targets.size()));
    for (std::size_t b = 0; b < targets.size(); ++b) t(static_cast<Eigen::Index>(b)) = targets[b];
    const DensityMatrix sigma = load_sigma_or_mixed(sigma_path, observables.dim());

    FitOptions options;
    options.tolerance = tolerance;
    const FitReport report = fit_gibbs(observables, t, sigma, options);

    Json out = gibbs_model_to_json(report.model);
    out["iterations"] = report.iterations;
    out["residual"] = report.residual;
    out["converged"] = report.converged;
    if (out_path.empty()) {
        std::cout << out.dump(2) << "\n";
    } else {
        save_json_file(out_path, out);
    }
    std::cerr << "fit: residual " << format_double17(report.residual) << " after "
              << report.iterations << " iterations\n";
    return 0;
}

int run_ranking(const std::string& ensemble_dir, const std::string& pool_path,
                const std::string& hypotheses_path, int max_size, const std::string& sigma_path,
                const std::string& out_prefix) {
    const EnsembleOnDisk ensemble = load_ensemble(ensemble_dir);
    const ObservableSet pool = pool_path.empty() ? ensemble.measurement
                                                 : observables_from_json(load_json_file(pool_path));
    const DensityMatrix sigma = sigma_path.empty() ? ensemble.sigma
                                                   : state_from_json(load_json_file(sigma_path));

    std::vector<RelevanceHypothesis> hypotheses;
    if (!hypotheses_path.empty()) {
        hypotheses = hypotheses_from_json(load_json_file(hypotheses_path), pool);
    } else {
        hypotheses = enumerate_hypotheses(pool, std::min(max_size, pool.size()));
    }

    const std::vector<RankedHypothesis> ranking =
        rank_hypotheses(ensemble.records, hypotheses, pool, sigma);
    save_json_file(out_prefix + ".json", ranking_to_json(ranking));
    save_text_file(out_prefix + ".csv", ranking_to_csv(ranking));
    std::cout << ranking.front().hypothesis.label << "\n";
    std::cerr << "ranking: top hypothesis " << ranking.front().hypothesis.label << " (total "
              << format_double17(ranking.front().score.total) << "), wrote " << out_prefix
              << ".json and .csv\n";
    return 0;
}

int run_entropy(const std::string& state_path, const std::string& rho_path) {
    const DensityMatrix mu = state_from_json(load_json_file(state_path));
    std::cout << format_double17(von_neumann_entropy(mu)) << "\n";
    if (!rho_path.empty()) {
        const DensityMatrix rho = state_from_json(load_json_file(rho_path));
        std::cout << format_double17(relative_entropy(mu, rho)) << "\n";
    }
    return 0;
}

int run_demo_bloch(const std::string& mode_name, double prior_width, std::optional<double> xbar,
                   std::int64_t n, int resolution, std::uint64_t seed, double true_x,
                   const std::string& out_path) {
    const SupportMode mode = support_mode_from_string(mode_name);
    double mean = 0.0;
    if (xbar) {
        mean = *xbar;
    } else {
        // No mean supplied: simulate N measurements of X on the true state
        // (true_x, 0, 0) with the given seed.
        Matrix m(2, 2);
        m << 0.5, 0.5 * true_x, 0.5 * true_x, 0.5;
        const DensityMatrix truth{HermitianOperator(std::move(m))};
        const ObservableSet x_set(2, {pauli_x()}, {"X"});
        mean = simulate_sample(truth, x_set, n, seed).values(0);
        std::cerr << "demo-bloch: simulated X mean " << format_double17(mean) << "\n";
    }
    const GridPosterior posterior = qubit_posterior(mode, prior_width, mean, n, resolution);
    save_text_file(out_path, posterior_to_csv(posterior));
    std::cerr << "demo-bloch: wrote " << posterior.points.size() << " grid cells to " << out_path
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Maximum-entropy Gibbs state estimation, asymptotic likelihoods and "
                 "relevant-observable selection"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "Generate a synthetic ensemble from a spec file");
    std::string gen_spec;
    std::string gen_out;
    std::optional<std::uint64_t> gen_seed;
    gen->add_option("--spec", gen_spec, "Ensemble spec JSON")->required();
    gen->add_option("--out", gen_out, "Output directory")->required();
    gen->add_option("--seed", gen_seed, "Override the spec seed");

    // fit
    auto* fit = app.add_subcommand("fit", "Fit a generalized Gibbs state to target expectations");
    std::string fit_obs;
    std::string fit_sigma;
    std::string fit_out;
    std::vector<double> fit_targets;
    double fit_tolerance = 1e-10;
    fit->add_option("--observables", fit_obs, "Observable set JSON")->required();
    fit->add_option("--targets", fit_targets, "Target expectation values")
        ->required()
        ->delimiter(',');
    fit->add_option("--sigma", fit_sigma, "Reference state JSON (default: totally mixed)");
    fit->add_option("--out", fit_out, "Output model JSON (default: stdout)");
    fit->add_option("--tolerance", fit_tolerance, "Constraint residual tolerance");

    // score / select
    std::string rank_ensemble;
    std::string rank_pool;
    std::string rank_hyps;
    std::string rank_sigma;
    std::string rank_out = "ranking";
    int rank_max_size = 3;
    auto* score = app.add_subcommand("score", "Score an explicit hypothesis list over an ensemble");
    score->add_option("--ensemble", rank_ensemble, "Ensemble directory (from gen)")->required();
    score->add_option("--hypotheses", rank_hyps, "Hypotheses JSON")->required();
    score->add_option("--pool", rank_pool, "Candidate pool JSON (default: measurement set)");
    score->add_option("--sigma", rank_sigma, "Reference state JSON (default: ensemble sigma)");
    score->add_option("--out", rank_out, "Output prefix for .json/.csv");

    auto* select = app.add_subcommand("select", "Rank all candidate subsets up to --max-size");
    select->add_option("--ensemble", rank_ensemble, "Ensemble directory (from gen)")->required();
    select->add_option("--pool", rank_pool, "Candidate pool JSON (default: measurement set)");
    select->add_option("--max-size", rank_max_size, "Largest subset size to enumerate");
    select->add_option("--sigma", rank_sigma, "Reference state JSON (default: ensemble sigma)");
    select->add_option("--out", rank_out, "Output prefix for .json/.csv");

    // entropy
    auto* entropy = app.add_subcommand("entropy", "Print S[state] and optionally S(state||rho)");
    std::string entropy_state;
    std::string entropy_rho;
    entropy->add_option("--state", entropy_state, "State JSON")->required();
    entropy->add_option("--rho", entropy_rho, "Second state JSON");

    // demo-bloch
    auto* demo = app.add_subcommand("demo-bloch", "Grid posterior over the Bloch ball");
    std::string demo_mode = "full-ball";
    double demo_width = 0.5;
    std::optional<double> demo_xbar;
    std::int64_t demo_n = 100;
    int demo_resolution = 101;
    std::optional<std::uint64_t> demo_seed;
    double demo_true_x = 0.0;
    std::string demo_out = "posterior.csv";
    demo->add_option("--mode", demo_mode, "full-ball, x-axis or y-axis");
    demo->add_option("--prior-width", demo_width, "Truncated Gaussian prior width");
    demo->add_option("--xbar", demo_xbar, "Observed X sample mean (default: simulate)");
    demo->add_option("--N", demo_n, "Sample size");
    demo->add_option("--resolution", demo_resolution, "Grid resolution per axis");
    demo->add_option("--seed", demo_seed, "Seed for the simulated mean")->required();
    demo->add_option("--true-x", demo_true_x, "True Bloch x component when simulating");
    demo->add_option("--out", demo_out, "Output CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (gen->parsed()) {
            require_distinct_paths({gen_spec, gen_out});
            return run_gen(gen_spec, gen_out, gen_seed);
        }
        if (fit->parsed()) {
            require_distinct_paths({fit_obs, fit_sigma, fit_out});
            return run_fit(fit_obs, fit_targets, fit_sigma, fit_out, fit_tolerance);
        }
        if (score->parsed() || select->parsed()) {
            require_distinct_paths({rank_ensemble, rank_pool, rank_hyps, rank_out + ".json"});
            return run_ranking(rank_ensemble, rank_pool, score->parsed() ? rank_hyps : "",
                               rank_max_size, rank_sigma, rank_out);
        }
        if (entropy->parsed()) {
            return run_entropy(entropy_state, entropy_rho);
        }
        if (demo->parsed()) {
            require_distinct_paths({demo_out});
            return run_demo_bloch(demo_mode, demo_width, demo_xbar, demo_n, demo_resolution,
                                  *demo_seed, demo_true_x, demo_out);
        }
    } catch (const InfeasibleTargets& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NonConvergence& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
