#ifndef GIBBSFIT_LIKELIHOOD_HPP
#define GIBBSFIT_LIKELIHOOD_HPP

#include <cstdint>
#include <utility>

#include "gibbsfit/gibbs.hpp"
#include "gibbsfit/operators.hpp"

namespace gibbsfit {

/// Per-observable sample means from a sample of size N. Each value must lie
/// within the spectral range of its observable.
struct SampleMeans {
    SampleMeans(ObservableSet observables, Eigen::VectorXd values, std::int64_t sample_size);

    ObservableSet observables;
    Eigen::VectorXd values;
    std::int64_t sample_size = 0;
};

/// -N S(mu|rho): the asymptotic log-likelihood of obtaining the complete
/// tomographic image mu from N copies of rho. -infinity off-support.
double stein_log_likelihood(const DensityMatrix& mu, const DensityMatrix& rho, std::int64_t n);

/// -N S(mu_f|rho) where mu_f is the Gibbs projection of the sample means
/// onto the family over rho. Throws InfeasibleTargets when the means are
/// not attainable over rho's support.
double sanov_log_likelihood(const SampleMeans& means, const DensityMatrix& rho);

/// Membership in the compatibility region: N S(mu_f|rho) <= -ln(1 - epsilon).
bool is_compatible(const SampleMeans& means, const DensityMatrix& rho, double epsilon);

/// Weighted-average image of two pooled samples and the combined size.
std::pair<DensityMatrix, std::int64_t> combine_images(const DensityMatrix& mu, std::int64_t n,
                                                      const DensityMatrix& mu2, std::int64_t n2);

}  // namespace gibbsfit

#endif  // GIBBSFIT_LIKELIHOOD_HPP
