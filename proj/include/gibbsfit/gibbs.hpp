#ifndef GIBBSFIT_GIBBS_HPP
#define GIBBSFIT_GIBBS_HPP

#include <stdexcept>

#include "gibbsfit/operators.hpp"

namespace gibbsfit {

/// Requested expectation values lie outside the open set attainable by the
/// generalized Gibbs family over the reference state.
class InfeasibleTargets : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The dual Newton iteration did not reach tolerance within the cap.
class NonConvergence : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Reference state sigma, observables F_b, Lagrange parameters kappa^b and
/// the realized state exp(ln sigma - kappa.F)/Z on sigma's support.
struct GibbsModel {
    DensityMatrix sigma;
    ObservableSet observables;
    Eigen::VectorXd kappa;
    DensityMatrix state;
    double log_partition = 0.0;
};

struct FitReport {
    GibbsModel model;
    int iterations = 0;
    double residual = 0.0;  // max_b |<F_b> - f_b|
    bool converged = false;
};

struct FitOptions {
    double tolerance = 1e-10;       // convergence on the constraint residual
    int max_iterations = 200;
    double kappa_divergence = 1e3;  // |kappa|_inf beyond this means infeasible
};

/// exp(ln sigma - sum_b kappa^b F_b) / Z, restricted to sigma's support.
DensityMatrix gibbs_state(const Eigen::VectorXd& kappa, const ObservableSet& observables,
                          const DensityMatrix& sigma);

/// ln tr exp(ln sigma - kappa.F) over sigma's support. Strictly convex in
/// kappa; its gradient is -<F_b> at the corresponding Gibbs state.
double log_partition(const Eigen::VectorXd& kappa, const ObservableSet& observables,
                     const DensityMatrix& sigma);

/// Solves <F_b> = f_b over the generalized Gibbs family by damped Newton
/// descent on the convex dual psi(kappa) = log_partition(kappa) + kappa.f.
/// The returned state is the unique minimizer of S(.|sigma) on the
/// constraint set. Throws InfeasibleTargets or NonConvergence.
FitReport fit_gibbs(const ObservableSet& observables, const Eigen::VectorXd& targets,
                    const DensityMatrix& sigma, const FitOptions& options = {});

/// |S(mu|rho) - S(mu|mu_g) - S(mu_g|rho)| where mu_g is the Gibbs projection
/// of mu's expectation values onto the family over rho.
double pythagoras_residual(const DensityMatrix& mu, const DensityMatrix& rho,
                           const ObservableSet& observables);

/// Covariance matrix H_ab = int_0^1 ds tr(mu^s Ft_a mu^(1-s) Ft_b) with
/// Ft = F - <F>; the Hessian of the log partition function.
Eigen::MatrixXd kubo_mori_covariance(const DensityMatrix& mu, const ObservableSet& observables);

}  // namespace gibbsfit

#endif  // GIBBSFIT_GIBBS_HPP
