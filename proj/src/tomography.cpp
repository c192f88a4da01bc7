#include "gibbsfit/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "gibbsfit/parallel.hpp"

namespace gibbsfit {

std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t sample_stream(std::uint64_t seed, std::uint64_t sample_index) {
    return mix_seed(seed ^ mix_seed(sample_index + 1));
}

namespace {

double uniform01(std::mt19937_64& engine) {
    return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

Matrix bloch_matrix(const Eigen::Vector3d& r) {
    Matrix m(2, 2);
    m(0, 0) = Complex(0.5 * (1.0 + r.z()), 0.0);
    m(1, 1) = Complex(0.5 * (1.0 - r.z()), 0.0);
    m(0, 1) = Complex(0.5 * r.x(), -0.5 * r.y());
    m(1, 0) = Complex(0.5 * r.x(), 0.5 * r.y());
    return m;
}

}  // namespace

SampleMeans simulate_sample(const DensityMatrix& true_state, const ObservableSet& measurement_set,
                            std::int64_t n, std::uint64_t seed) {
    if (n < 1) {
        throw std::invalid_argument("simulate_sample: N must be >= 1");
    }
    if (true_state.dim() != measurement_set.dim()) {
        throw std::invalid_argument("simulate_sample: dimension mismatch");
    }
    const int p = measurement_set.size();
    Eigen::VectorXd means(p);
    for (int b = 0; b < p; ++b) {
        const EigenSystem sys = spectral_decomposition(measurement_set[b]);
        const int d = static_cast<int>(sys.values.size());

        // Born probabilities of the eigenvectors; clip numerical dust so an
        // exact eigenstate yields one deterministic outcome.
        Eigen::VectorXd probs(d);
        for (int k = 0; k < d; ++k) {
            const auto v = sys.vectors.col(k);
            double w = (v.adjoint() * true_state.matrix() * v)(0, 0).real();
            if (w < 1e-14) w = 0.0;
            probs(k) = w;
        }
        probs /= probs.sum();
        Eigen::VectorXd cumulative(d);
        double acc = 0.0;
        for (int k = 0; k < d; ++k) {
            acc += probs(k);
            cumulative(k) = acc;
        }
        cumulative(d - 1) = 1.0;

        std::mt19937_64 engine(mix_seed(seed ^ mix_seed(0xB5297A4D3A2D9FE5ULL + static_cast<std::uint64_t>(b))));
        std::vector<std::int64_t> counts(static_cast<std::size_t>(d), 0);
        for (std::int64_t shot = 0; shot < n; ++shot) {
            const double u = uniform01(engine);
            int k = 0;
            while (k < d - 1 && u >= cumulative(k)) ++k;
            ++counts[static_cast<std::size_t>(k)];
        }

        double mean = 0.0;
        for (int k = 0; k < d; ++k) {
            if (counts[static_cast<std::size_t>(k)] == 0) continue;
            mean += sys.values(k) * (static_cast<double>(counts[static_cast<std::size_t>(k)]) /
                                     static_cast<double>(n));
        }
        means(b) = mean;
    }
    return SampleMeans(measurement_set, std::move(means), n);
}

Reconstruction reconstruct_image(const SampleMeans& means, const DensityMatrix& sigma) {
    try {
        const FitReport fit = fit_gibbs(means.observables, means.values, sigma);
        return Reconstruction{fit.model.state, 1.0, fit.residual, 0};
    } catch (const InfeasibleTargets&) {
    } catch (const NonConvergence&) {
    }

    Eigen::VectorXd reference(means.observables.size());
    for (int b = 0; b < means.observables.size(); ++b) {
        reference(b) = expectation(sigma, means.observables[b]);
    }
    for (int k = 1; k <= 500; ++k) {
        const double gamma = std::pow(0.99, k);
        const Eigen::VectorXd shrunk = gamma * means.values + (1.0 - gamma) * reference;
        try {
            const FitReport fit = fit_gibbs(means.observables, shrunk, sigma);
            return Reconstruction{fit.model.state, gamma, fit.residual, k};
        } catch (const InfeasibleTargets&) {
        } catch (const NonConvergence&) {
        }
    }
    throw NonConvergence("reconstruct_image: no convergent fit after maximal shrinkage");
}

std::vector<SampleRecord> generate_ensemble(const EnsembleSpec& spec) {
    const std::size_t count = spec.parameter_draws.size();
    if (count == 0 || spec.sizes.size() != count) {
        throw std::invalid_argument(
            "generate_ensemble: parameter_draws and sizes must have equal length >= 1");
    }
    for (const auto& draw : spec.parameter_draws) {
        if (draw.size() != spec.family.size()) {
            throw std::invalid_argument("generate_ensemble: parameter draw length does not match family");
        }
    }
    for (const auto n : spec.sizes) {
        if (n < 1) throw std::invalid_argument("generate_ensemble: sample sizes must be positive");
    }

    std::vector<std::optional<SampleRecord>> slots(count);
    parallel_for(count, [&](std::size_t i) {
        const DensityMatrix truth = gibbs_state(spec.parameter_draws[i], spec.family, spec.sigma);
        const SampleMeans means = simulate_sample(truth, spec.measurement_set, spec.sizes[i],
                                                  sample_stream(spec.seed, i));
        const Reconstruction rec = reconstruct_image(means, spec.sigma);

        std::string id = std::to_string(i);
        id.insert(0, id.size() < 4 ? 4 - id.size() : 0, '0');
        slots[i] = SampleRecord{"sample_" + id, spec.sizes[i],       means,
                                rec.image,      truth,               rec.shrink_factor,
                                rec.residual};
    });

    std::vector<SampleRecord> records;
    records.reserve(count);
    for (auto& slot : slots) records.push_back(std::move(*slot));
    return records;
}

SupportMode support_mode_from_string(const std::string& name) {
    if (name == "full-ball") return SupportMode::FullBall;
    if (name == "x-axis") return SupportMode::XAxis;
    if (name == "y-axis") return SupportMode::YAxis;
    throw std::invalid_argument("unknown support mode '" + name +
                                "' (expected full-ball, x-axis or y-axis)");
}

std::string to_string(SupportMode mode) {
    switch (mode) {
        case SupportMode::FullBall: return "full-ball";
        case SupportMode::XAxis: return "x-axis";
        case SupportMode::YAxis: return "y-axis";
    }
    throw std::logic_error("unreachable");
}

GridPosterior qubit_prior_grid(SupportMode mode, double prior_width, int resolution) {
    if (resolution < 11) {
        throw std::invalid_argument("qubit grid: resolution must be >= 11");
    }
    if (!(prior_width > 0.0)) {
        throw std::invalid_argument("qubit grid: prior width must be positive");
    }
    GridPosterior grid;
    grid.mode = mode;
    grid.resolution = resolution;

    const auto axis_value = [resolution](int i) {
        return -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(resolution - 1);
    };

    if (mode == SupportMode::FullBall) {
        for (int ix = 0; ix < resolution; ++ix) {
            for (int iy = 0; iy < resolution; ++iy) {
                for (int iz = 0; iz < resolution; ++iz) {
                    const Eigen::Vector3d r(axis_value(ix), axis_value(iy), axis_value(iz));
                    if (r.squaredNorm() <= 1.0 + 1e-12) grid.points.push_back(r);
                }
            }
        }
    } else {
        for (int i = 0; i < resolution; ++i) {
            const double v = axis_value(i);
            grid.points.emplace_back(mode == SupportMode::XAxis ? v : 0.0,
                                     mode == SupportMode::YAxis ? v : 0.0, 0.0);
        }
    }

    grid.weights.resize(grid.points.size());
    double total = 0.0;
    for (std::size_t i = 0; i < grid.points.size(); ++i) {
        const double w = std::exp(-grid.points[i].squaredNorm() / (2.0 * prior_width * prior_width));
        grid.weights[i] = w;
        total += w;
    }
    for (double& w : grid.weights) w /= total;
    return grid;
}

GridPosterior posterior_update(const GridPosterior& grid, double xbar, std::int64_t n) {
    if (std::abs(xbar) > 1.0) {
        throw std::invalid_argument("posterior_update: |xbar| must be <= 1");
    }
    if (n < 1) {
        throw std::invalid_argument("posterior_update: N must be >= 1");
    }
    // On the y-axis support the measured X record carries no information
    // about the axis observable Y, so the update is trivial.
    if (grid.mode == SupportMode::YAxis) return grid;

    const ObservableSet x_set(2, {pauli_x()}, {"X"});
    Eigen::VectorXd value(1);
    value << xbar;
    const SampleMeans means(x_set, value, n);

    GridPosterior out = grid;
    std::vector<double> likelihood(grid.points.size(), 0.0);
    parallel_for(grid.points.size(), [&](std::size_t i) {
        try {
            const DensityMatrix rho(bloch_matrix(grid.points[i]));
            likelihood[i] = std::exp(sanov_log_likelihood(means, rho));
        } catch (const InfeasibleTargets&) {
            likelihood[i] = 0.0;  // this cell cannot produce the observed mean
        }
    });

    double total = 0.0;
    for (std::size_t i = 0; i < out.weights.size(); ++i) {
        out.weights[i] *= likelihood[i];
        total += out.weights[i];
    }
    if (!(total > 0.0)) {
        throw std::domain_error("posterior_update: posterior mass vanished on the whole grid");
    }
    for (double& w : out.weights) w /= total;
    return out;
}

GridPosterior qubit_posterior(SupportMode mode, double prior_width, double xbar, std::int64_t n,
                              int resolution) {
    return posterior_update(qubit_prior_grid(mode, prior_width, resolution), xbar, n);
}

double total_variation(const GridPosterior& a, const GridPosterior& b) {
    if (a.weights.size() != b.weights.size()) {
        throw std::invalid_argument("total_variation: grids differ in size");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < a.weights.size(); ++i) {
        sum += std::abs(a.weights[i] - b.weights[i]);
    }
    return 0.5 * sum;
}

}  // namespace gibbsfit
