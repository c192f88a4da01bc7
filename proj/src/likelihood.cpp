#include "gibbsfit/likelihood.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace gibbsfit {

SampleMeans::SampleMeans(ObservableSet observables_in, Eigen::VectorXd values_in,
                         std::int64_t sample_size_in)
    : observables(std::move(observables_in)),
      values(std::move(values_in)),
      sample_size(sample_size_in) {
    if (values.size() != observables.size()) {
        throw std::invalid_argument("SampleMeans: values length does not match observables");
    }
    if (sample_size < 1) {
        throw std::invalid_argument("SampleMeans: sample size must be positive");
    }
    for (int b = 0; b < observables.size(); ++b) {
        const EigenSystem sys = spectral_decomposition(observables[b]);
        const double hi = sys.values(0);
        const double lo = sys.values(sys.values.size() - 1);
        if (values(b) < lo - 1e-12 || values(b) > hi + 1e-12) {
            throw std::invalid_argument("SampleMeans: value " + std::to_string(values(b)) +
                                        " for '" + observables.labels()[static_cast<std::size_t>(b)] +
                                        "' is outside the spectral range [" + std::to_string(lo) +
                                        ", " + std::to_string(hi) + "]");
        }
    }
}

double stein_log_likelihood(const DensityMatrix& mu, const DensityMatrix& rho, std::int64_t n) {
    if (n < 1) {
        throw std::invalid_argument("stein_log_likelihood: N must be >= 1");
    }
    const double s = relative_entropy(mu, rho);
    if (std::isinf(s)) return -std::numeric_limits<double>::infinity();
    return -static_cast<double>(n) * s;
}

double sanov_log_likelihood(const SampleMeans& means, const DensityMatrix& rho) {
    const FitReport fit = fit_gibbs(means.observables, means.values, rho);
    return -static_cast<double>(means.sample_size) * relative_entropy(fit.model.state, rho);
}

bool is_compatible(const SampleMeans& means, const DensityMatrix& rho, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
        throw std::invalid_argument("is_compatible: epsilon must lie in (0, 1)");
    }
    return sanov_log_likelihood(means, rho) >= std::log1p(-epsilon);
}

std::pair<DensityMatrix, std::int64_t> combine_images(const DensityMatrix& mu, std::int64_t n,
                                                      const DensityMatrix& mu2, std::int64_t n2) {
    if (mu.dim() != mu2.dim()) {
        throw std::invalid_argument("combine_images: dimension mismatch");
    }
    if (n < 1 || n2 < 1) {
        throw std::invalid_argument("combine_images: sample sizes must be positive");
    }
    const double total = static_cast<double>(n) + static_cast<double>(n2);
    Matrix avg = (static_cast<double>(n) / total) * mu.matrix() +
                 (static_cast<double>(n2) / total) * mu2.matrix();
    return {DensityMatrix(std::move(avg)), n + n2};
}

}  // namespace gibbsfit
