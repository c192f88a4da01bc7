// End-to-end acceptance suite. Each test case checks one numbered criterion
// at its stated tolerance and prints a single PASS/FAIL line, so a full run
// gives a one-page report:
//
//   [C01] PASS  gibbs fit correctness
//   ...
//
// Everything is seeded; reruns are bit-identical.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gibbsfit/json_io.hpp"
#include "test_support.hpp"

using namespace gibbsfit;
using namespace gftest;
namespace fs = std::filesystem;

namespace {

void criterion(int number, const char* name, bool ok) {
    std::printf("[C%02d] %s  %s\n", number, ok ? "PASS" : "FAIL", name);
    std::fflush(stdout);
    CHECK_MESSAGE(ok, "criterion ", number, " (", name, ")");
}

Eigen::VectorXd expectations_of(const DensityMatrix& state, const ObservableSet& obs) {
    Eigen::VectorXd values(obs.size());
    for (int b = 0; b < obs.size(); ++b) values(b) = expectation(state, obs[b]);
    return values;
}

// Hermitian operator basis of the traceless space (generalized Gell-Mann),
// informationally complete together with the identity.
ObservableSet complete_basis(int d) {
    std::vector<HermitianOperator> ops;
    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
            Matrix sym = Matrix::Zero(d, d);
            sym(i, j) = 1.0;
            sym(j, i) = 1.0;
            ops.emplace_back(sym);
            Matrix anti = Matrix::Zero(d, d);
            anti(i, j) = Complex(0.0, -1.0);
            anti(j, i) = Complex(0.0, 1.0);
            ops.emplace_back(anti);
        }
    }
    for (int k = 1; k < d; ++k) {
        Matrix diag = Matrix::Zero(d, d);
        for (int i = 0; i < k; ++i) diag(i, i) = 1.0;
        diag(k, k) = -static_cast<double>(k);
        ops.emplace_back(diag);
    }
    return ObservableSet(d, std::move(ops));
}

// Candidate pool of the model-selection experiments: a collective-Z
// "Hamiltonian" plus transverse candidates that the family never excites.
ObservableSet recovery_pool() {
    const Matrix x = pauli_x().matrix();
    const Matrix z = pauli_z().matrix();
    const Matrix id = Matrix::Identity(2, 2);
    return ObservableSet(4,
                         {HermitianOperator(kronecker(z, id) + kronecker(id, z)),
                          HermitianOperator(kronecker(x, id)), HermitianOperator(kronecker(id, x)),
                          HermitianOperator(kronecker(x, x))},
                         {"H", "X1", "X2", "Gxx"});
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

int run_cli(const std::string& args) {
    const std::string command = std::string(GIBBSFIT_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    return std::system(command.c_str());
}

}  // namespace

TEST_CASE("criterion 1: gibbs fit correctness") {
    std::mt19937_64 rng(20240901);
    bool ok = true;

    const int dims[] = {2, 4, 8, 16};
    for (int trial = 0; trial < 100; ++trial) {
        const int d = dims[trial % 4];
        const int p = 1 + trial % (d == 2 ? 3 : 5);
        const ObservableSet obs = random_observables(d, p, rng);
        const DensityMatrix sigma = random_density(d, rng, 0.05);
        const DensityMatrix witness = random_density(d, rng, 0.05);
        const Eigen::VectorXd targets = expectations_of(witness, obs);

        const FitReport report = fit_gibbs(obs, targets, sigma);
        const double residual =
            (expectations_of(report.model.state, obs) - targets).cwiseAbs().maxCoeff();
        // report.residual is the solver's own bound; re-measure independently
        // and allow embedding round-off on top of the 1e-10 contract
        if (!report.converged || report.residual > 1e-10 || residual > 2e-10) {
            ok = false;
        }
    }

    // Closed-form comparison: stop tighter than the 1e-10 contract so the
    // check measures solver accuracy, not where the stopping rule landed
    // (the kappa <- g map amplifies the final residual by 1/(1 - g^2)).
    const ObservableSet zs(2, {pauli_z()}, {"Z"});
    const DensityMatrix mixed = DensityMatrix::maximally_mixed(2);
    FitOptions tight;
    tight.tolerance = 1e-13;
    for (int trial = 0; trial < 20; ++trial) {
        const double g = 1.9 * (uniform(rng) - 0.5);  // in (-0.95, 0.95)
        Eigen::VectorXd target(1);
        target << g;
        const FitReport report = fit_gibbs(zs, target, mixed, tight);
        if (std::abs(report.model.kappa(0) + std::atanh(g)) > 1e-10) ok = false;
    }

    criterion(1, "gibbs fit correctness", ok);
}

TEST_CASE("criterion 2: dual calculus") {
    std::mt19937_64 rng(20240902);
    bool ok = true;
    const double h = 1e-5;

    for (int trial = 0; trial < 50; ++trial) {
        const int d = trial % 2 == 0 ? 2 : 4;
        const int p = 1 + trial % 3;
        const ObservableSet obs = random_observables(d, p, rng);
        const DensityMatrix sigma = random_density(d, rng, 0.05);
        Eigen::VectorXd kappa(p);
        for (int b = 0; b < p; ++b) kappa(b) = uniform(rng) - 0.5;

        const DensityMatrix state = gibbs_state(kappa, obs, sigma);
        for (int b = 0; b < p; ++b) {
            Eigen::VectorXd up = kappa, dn = kappa;
            up(b) += h;
            dn(b) -= h;
            const double fd =
                (log_partition(up, obs, sigma) - log_partition(dn, obs, sigma)) / (2.0 * h);
            const double analytic = -expectation(state, obs[b]);
            if (std::abs(fd - analytic) > 1e-6 * std::max({1.0, std::abs(fd), std::abs(analytic)})) {
                ok = false;
            }
        }

        const Eigen::MatrixXd analytic = kubo_mori_covariance(state, obs);
        Eigen::MatrixXd fd(p, p);
        for (int b = 0; b < p; ++b) {
            Eigen::VectorXd up = kappa, dn = kappa;
            up(b) += h;
            dn(b) -= h;
            const Eigen::VectorXd gup = -expectations_of(gibbs_state(up, obs, sigma), obs);
            const Eigen::VectorXd gdn = -expectations_of(gibbs_state(dn, obs, sigma), obs);
            fd.col(b) = (gup - gdn) / (2.0 * h);
        }
        if ((analytic - fd).cwiseAbs().maxCoeff() > 1e-4 * std::max(1.0, fd.cwiseAbs().maxCoeff())) {
            ok = false;
        }
    }
    criterion(2, "dual calculus (gradient and Kubo-Mori Hessian)", ok);
}

TEST_CASE("criterion 3: Pythagoras decomposition") {
    std::mt19937_64 rng(20240903);
    bool ok = true;
    for (int trial = 0; trial < 100; ++trial) {
        const int d = trial % 2 == 0 ? 2 : 4;
        const int p = 1 + trial % (d == 2 ? 2 : 3);
        const ObservableSet obs = random_observables(d, p, rng);
        const DensityMatrix mu = random_density(d, rng, 0.02);
        const DensityMatrix rho = random_density(d, rng, 0.02);
        if (pythagoras_residual(mu, rho, obs) > 1e-8) ok = false;
    }
    criterion(3, "Pythagoras decomposition of the relative entropy", ok);
}

TEST_CASE("criterion 4: Sanov reduces to Stein on complete pools") {
    std::mt19937_64 rng(20240904);
    bool ok = true;
    for (int trial = 0; trial < 50; ++trial) {
        const int d = trial % 2 == 0 ? 2 : 4;
        const ObservableSet pool = complete_basis(d);
        const DensityMatrix mu = random_density(d, rng, 0.02);
        const DensityMatrix rho = random_density(d, rng, 0.02);
        const std::int64_t n = 10;
        const SampleMeans means(pool, expectations_of(mu, pool), n);
        if (std::abs(sanov_log_likelihood(means, rho) - stein_log_likelihood(mu, rho, n)) > 1e-8) {
            ok = false;
        }
    }
    criterion(4, "Sanov likelihood reduces to Stein on complete pools", ok);
}

TEST_CASE("criterion 5: mixing rule is reference independent") {
    std::mt19937_64 rng(20240905);
    bool ok = true;
    for (int quad = 0; quad < 20; ++quad) {
        const int d = quad % 2 == 0 ? 2 : 4;
        const DensityMatrix mu = random_density(d, rng, 0.02);
        const DensityMatrix mu2 = random_density(d, rng, 0.02);
        const std::int64_t n = 10 + static_cast<std::int64_t>(uniform(rng) * 1000);
        const std::int64_t n2 = 10 + static_cast<std::int64_t>(uniform(rng) * 1000);
        const auto [avg, total] = combine_images(mu, n, mu2, n2);

        double mean = 0.0;
        std::vector<double> defects(50);
        for (int trial = 0; trial < 50; ++trial) {
            const DensityMatrix rho = random_density(d, rng, 0.02);
            defects[static_cast<std::size_t>(trial)] = stein_log_likelihood(mu, rho, n) +
                                                       stein_log_likelihood(mu2, rho, n2) -
                                                       stein_log_likelihood(avg, rho, total);
            mean += defects[static_cast<std::size_t>(trial)];
        }
        mean /= 50.0;
        double variance = 0.0;
        for (const double ht : defects) variance += (ht - mean) * (ht - mean);
        variance /= 50.0;
        if (variance >= 1e-10) ok = false;
    }
    criterion(5, "mixing rule combination defect is independent of rho", ok);
}

TEST_CASE("criterion 6: generalized Gibbs states are projection fixed points") {
    std::mt19937_64 rng(20240906);
    bool ok = true;
    for (int trial = 0; trial < 50; ++trial) {
        const int d = trial % 2 == 0 ? 2 : 4;
        const int p = 1 + trial % (d == 2 ? 2 : 3);
        const ObservableSet pool = random_observables(d, p, rng);
        const DensityMatrix sigma = random_density(d, rng, 0.05);
        Eigen::VectorXd kappa(p);
        for (int b = 0; b < p; ++b) kappa(b) = 2.0 * (uniform(rng) - 0.5);
        const DensityMatrix rho = gibbs_state(kappa, pool, sigma);

        std::vector<int> all_indices;
        for (int b = 0; b < p; ++b) all_indices.push_back(b);
        const DensityMatrix projected =
            project_to_hypothesis(rho, {"full", all_indices}, pool, sigma);
        if ((projected.matrix() - rho.matrix()).norm() > 1e-8) ok = false;
    }
    criterion(6, "generalized Gibbs states are projection fixed points", ok);
}

TEST_CASE("criterion 7: model selection recovers the generating family") {
    const ObservableSet pool = recovery_pool();
    const DensityMatrix mixed = DensityMatrix::maximally_mixed(4);
    const ObservableSet family = pool.subset({0});

    int wins = 0;
    bool full_never_beats = true;
    for (std::uint64_t rep = 0; rep < 20; ++rep) {
        EnsembleSpec spec{mixed, family, {}, {}, pool, 20240907 + rep};
        std::mt19937_64 rng(mix_seed(20240907 + rep));
        for (int i = 0; i < 20; ++i) {
            Eigen::VectorXd kappa(1);
            kappa(0) = 0.1 + 1.9 * uniform(rng);
            spec.parameter_draws.push_back(kappa);
            spec.sizes.push_back(10000);
        }
        const auto records = generate_ensemble(spec);

        auto hypotheses = enumerate_hypotheses(pool, 2);
        hypotheses.push_back({"{H,X1,X2,Gxx}", {0, 1, 2, 3}});
        const auto ranked = rank_hypotheses(records, hypotheses, pool, mixed);

        if (ranked[0].hypothesis.label == "{H}") ++wins;
        double total_true = 0.0, total_full = 0.0;
        for (const auto& r : ranked) {
            if (r.hypothesis.label == "{H}") total_true = r.score.total;
            if (r.hypothesis.p() == 4) total_full = r.score.total;
        }
        if (total_full > total_true) full_never_beats = false;
    }
    const bool ok = wins >= 18 && full_never_beats;
    std::printf("      (true singleton first in %d/20 replications)\n", wins);
    criterion(7, "model selection recovers the generating family", ok);
}

TEST_CASE("criterion 8: Occam penalty arithmetic") {
    const ObservableSet pool = recovery_pool();
    const DensityMatrix mixed = DensityMatrix::maximally_mixed(4);
    const ObservableSet family = pool.subset({0});

    EnsembleSpec spec{mixed, family, {}, {}, pool, 20240908};
    std::mt19937_64 rng(mix_seed(20240908));
    for (int i = 0; i < 6; ++i) {
        Eigen::VectorXd kappa(1);
        kappa(0) = 0.1 + 1.9 * uniform(rng);
        spec.parameter_draws.push_back(kappa);
        spec.sizes.push_back(1000 + 500 * i);
    }
    const auto records = generate_ensemble(spec);

    std::vector<double> sizes;
    double log_sum = 0.0;
    for (const auto& r : records) {
        sizes.push_back(static_cast<double>(r.size));
        log_sum += std::log(static_cast<double>(r.size));
    }

    bool ok = true;
    const RelevanceHypothesis one{"{H}", {0}};
    const RelevanceHypothesis two{"{H,X1}", {0, 1}};
    const HypothesisScore s1 = score_hypothesis(records, one, pool, mixed);
    const HypothesisScore s2 = score_hypothesis(records, two, pool, mixed);

    // penalty term is exactly -(p/2) sum ln N_i as computed by the formula
    if (s1.penalty_term != occam_penalty(1, sizes)) ok = false;
    if (s2.penalty_term != occam_penalty(2, sizes)) ok = false;
    if (s1.total != s1.fit_term + s1.penalty_term) ok = false;

    // at equal fit, one more parameter costs exactly (1/2) sum ln N_i
    for (int p = 0; p < 4; ++p) {
        const double drop = occam_penalty(p, sizes) - occam_penalty(p + 1, sizes);
        if (std::abs(drop - 0.5 * log_sum) > 4.0 * 1e-16 * std::abs(log_sum)) ok = false;
    }
    criterion(8, "Occam penalty arithmetic", ok);
}

TEST_CASE("criterion 9: Bloch-ball posterior demo") {
    bool ok = true;

    const GridPosterior prior = qubit_prior_grid(SupportMode::YAxis, 0.5, 101);
    for (const double xbar : {0.0, 0.4, -0.7}) {
        const GridPosterior posterior = posterior_update(prior, xbar, 100);
        if (total_variation(prior, posterior) > 1e-12) ok = false;
    }

    const GridPosterior ball = qubit_posterior(SupportMode::FullBall, 0.5, 0.4, 100, 101);
    std::size_t mode = 0;
    for (std::size_t i = 1; i < ball.weights.size(); ++i) {
        if (ball.weights[i] > ball.weights[mode]) mode = i;
    }
    const Eigen::Vector3d at = ball.points[mode];
    if (!(at.x() > 0.0 && at.x() < 0.4 && at.y() == 0.0 && at.z() == 0.0)) ok = false;

    double sum = 0.0;
    for (const double w : ball.weights) sum += w;
    if (std::abs(sum - 1.0) > 1e-12) ok = false;

    std::printf("      (full-ball posterior mode at x = %.3f)\n", at.x());
    criterion(9, "Bloch-ball posterior demo", ok);
}

TEST_CASE("criterion 10: command-line determinism") {
    const fs::path base = fs::temp_directory_path() / "gibbsfit_acceptance";
    fs::remove_all(base);
    fs::create_directories(base);

    // ensemble spec fixture
    const ObservableSet pool = recovery_pool();
    EnsembleSpec spec{DensityMatrix::maximally_mixed(4), pool.subset({0}), {}, {},
                      pool,                              20240910};
    std::mt19937_64 rng(1);
    for (int i = 0; i < 4; ++i) {
        Eigen::VectorXd kappa(1);
        kappa(0) = 0.1 + 1.9 * uniform(rng);
        spec.parameter_draws.push_back(kappa);
        spec.sizes.push_back(2000);
    }
    save_json_file(base / "spec.json", ensemble_spec_to_json(spec));

    bool ok = true;
    if (run_cli("gen --spec " + (base / "spec.json").string() + " --out " + (base / "runA").string()) != 0) ok = false;
    if (run_cli("gen --spec " + (base / "spec.json").string() + " --out " + (base / "runB").string()) != 0) ok = false;
    for (const char* name : {"manifest.json", "sample_0000.json", "sample_0003.json"}) {
        if (read_file(base / "runA" / name) != read_file(base / "runB" / name)) ok = false;
    }

    const std::string demo_args = "demo-bloch --mode x-axis --N 500 --resolution 51 --seed 11 "
                                  "--true-x 0.3 --out ";
    if (run_cli(demo_args + (base / "demoA.csv").string()) != 0) ok = false;
    if (run_cli(demo_args + (base / "demoB.csv").string()) != 0) ok = false;
    if (read_file(base / "demoA.csv") != read_file(base / "demoB.csv")) ok = false;

    fs::remove_all(base);
    criterion(10, "command-line determinism (gen, demo-bloch)", ok);
}
