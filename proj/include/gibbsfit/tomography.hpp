#ifndef GIBBSFIT_TOMOGRAPHY_HPP
#define GIBBSFIT_TOMOGRAPHY_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gibbsfit/gibbs.hpp"
#include "gibbsfit/likelihood.hpp"
#include "gibbsfit/operators.hpp"

namespace gibbsfit {

/// SplitMix64 finalizer; the basis of all stream derivation.
std::uint64_t mix_seed(std::uint64_t x);

/// Independent generator stream for one sample of an ensemble.
std::uint64_t sample_stream(std::uint64_t seed, std::uint64_t sample_index);

/// Measures each observable independently on its own N fresh copies:
/// projective outcomes drawn from the Born distribution of true_state with a
/// deterministic generator derived from (seed, observable index). Identical
/// arguments give bit-identical means.
SampleMeans simulate_sample(const DensityMatrix& true_state, const ObservableSet& measurement_set,
                            std::int64_t n, std::uint64_t seed);

/// Max-ent image of one sample's means. When the raw means are not
/// attainable, they are shrunk toward the reference expectations,
/// f <- g f + (1-g) <F>_sigma with g = 0.99^k for the smallest k that
/// converges (k <= 500), so the image is always full rank on sigma's support.
struct Reconstruction {
    DensityMatrix image;
    double shrink_factor = 1.0;  // final g; 1 when no shrinkage was needed
    double residual = 0.0;       // fit residual against the (shrunk) means
    int shrink_steps = 0;
};

Reconstruction reconstruct_image(const SampleMeans& means, const DensityMatrix& sigma);

struct SampleRecord {
    std::string id;
    std::int64_t size = 0;
    SampleMeans means;
    DensityMatrix image;
    std::optional<DensityMatrix> true_state;
    double shrink_factor = 1.0;
    double residual = 0.0;
};

/// A family of true states gibbs_state(kappa_i, family, sigma), one per
/// sample, plus what is actually measured and how often.
struct EnsembleSpec {
    DensityMatrix sigma;
    ObservableSet family;
    std::vector<Eigen::VectorXd> parameter_draws;
    std::vector<std::int64_t> sizes;
    ObservableSet measurement_set;
    std::uint64_t seed = 0;
};

/// Simulates and reconstructs every sample. Deterministic given the spec;
/// samples use independent streams so results do not depend on scheduling.
std::vector<SampleRecord> generate_ensemble(const EnsembleSpec& spec);

enum class SupportMode { FullBall, XAxis, YAxis };

SupportMode support_mode_from_string(const std::string& name);
std::string to_string(SupportMode mode);

/// Discretized distribution over Bloch vectors. Cells off the declared
/// support carry no weight; full-ball grids exclude |r| > 1 cells entirely.
struct GridPosterior {
    SupportMode mode = SupportMode::FullBall;
    int resolution = 0;
    std::vector<Eigen::Vector3d> points;
    std::vector<double> weights;  // normalized to sum 1
};

/// Truncated Gaussian prior of the given width centered on the totally
/// mixed state, discretized on the declared support.
GridPosterior qubit_prior_grid(SupportMode mode, double prior_width, int resolution);

/// Multiplies the grid weights by the likelihood of an X sample mean and
/// renormalizes. On an axis support the update uses the part of the data
/// that bears on the axis observable: the X record fixes the X mean on the
/// x axis and carries nothing about Y, so a y-axis update is trivial.
GridPosterior posterior_update(const GridPosterior& grid, double xbar, std::int64_t n);

/// prior_grid followed by one posterior_update.
GridPosterior qubit_posterior(SupportMode mode, double prior_width, double xbar, std::int64_t n,
                              int resolution);

double total_variation(const GridPosterior& a, const GridPosterior& b);

}  // namespace gibbsfit

#endif  // GIBBSFIT_TOMOGRAPHY_HPP
