#include "gibbsfit/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace gibbsfit {

namespace {

// Divided-difference kernel (x - y)/(ln x - ln y) of the Kubo-Mori integral,
// with the x == y and zero-eigenvalue limits.
double km_kernel(double x, double y) {
    if (x <= 0.0 && y <= 0.0) return 0.0;
    if (x <= 0.0 || y <= 0.0) return 0.0;
    if (x == y) return x;
    return (x - y) / std::log1p((x - y) / y);
}

Eigen::MatrixXd km_matrix(const Eigen::VectorXd& eigs, const std::vector<Matrix>& centered_in_eigenbasis) {
    const Eigen::Index r = eigs.size();
    const int p = static_cast<int>(centered_in_eigenbasis.size());
    Eigen::MatrixXd kernel(r, r);
    for (Eigen::Index i = 0; i < r; ++i) {
        for (Eigen::Index j = 0; j < r; ++j) {
            kernel(i, j) = km_kernel(eigs(i), eigs(j));
        }
    }
    Eigen::MatrixXd h(p, p);
    for (int a = 0; a < p; ++a) {
        for (int b = a; b < p; ++b) {
            double sum = 0.0;
            const Matrix& fa = centered_in_eigenbasis[static_cast<std::size_t>(a)];
            const Matrix& fb = centered_in_eigenbasis[static_cast<std::size_t>(b)];
            for (Eigen::Index i = 0; i < r; ++i) {
                for (Eigen::Index j = 0; j < r; ++j) {
                    sum += kernel(i, j) * (fa(i, j) * std::conj(fb(i, j))).real();
                }
            }
            h(a, b) = sum;
            h(b, a) = sum;
        }
    }
    return h;
}

struct SupportFrame {
    Matrix basis;              // d x r isometry onto sigma's support
    Eigen::VectorXd log_eigs;  // ln of sigma's support eigenvalues
    std::vector<Matrix> ops;   // observables projected into the support
};

SupportFrame project_onto_support(const ObservableSet& observables, const DensityMatrix& sigma) {
    if (observables.dim() != sigma.dim()) {
        throw std::invalid_argument("gibbs: observables and sigma dimension mismatch");
    }
    SupportFrame frame;
    const int r = sigma.support_dim();
    frame.basis = sigma.eigenvectors().leftCols(r);
    frame.log_eigs.resize(r);
    for (int k = 0; k < r; ++k) {
        frame.log_eigs(k) = std::log(sigma.eigenvalues()(k));
    }
    frame.ops.reserve(static_cast<std::size_t>(observables.size()));
    for (int b = 0; b < observables.size(); ++b) {
        Matrix proj = frame.basis.adjoint() * observables[b].matrix() * frame.basis;
        frame.ops.push_back(0.5 * (proj + proj.adjoint().eval()));
    }
    return frame;
}

Matrix exponent_matrix(const SupportFrame& frame, const Eigen::VectorXd& weights) {
    Matrix a = frame.log_eigs.asDiagonal().toDenseMatrix().cast<Complex>();
    for (Eigen::Index b = 0; b < weights.size(); ++b) {
        a -= weights(b) * frame.ops[static_cast<std::size_t>(b)];
    }
    return a;
}

struct ExponentState {
    EigenSystem sys;        // of the exponent matrix, descending
    Eigen::VectorXd probs;  // softmax of the eigenvalues
    double log_z = 0.0;
};

ExponentState exponentiate(const Matrix& a) {
    ExponentState st;
    st.sys = spectral_decomposition(a);
    const double amax = st.sys.values(0);
    st.probs = (st.sys.values.array() - amax).exp();
    const double total = st.probs.sum();
    st.probs /= total;
    st.log_z = amax + std::log(total);
    return st;
}

double log_z_of(const Matrix& a) {
    Eigen::VectorXd vals;
    if (a.rows() == 2) {
        const double tr_half = 0.5 * (a(0, 0).real() + a(1, 1).real());
        const double radius = std::hypot(0.5 * (a(0, 0).real() - a(1, 1).real()), std::abs(a(0, 1)));
        vals.resize(2);
        vals << tr_half + radius, tr_half - radius;
    } else {
        Eigen::SelfAdjointEigenSolver<Matrix> solver(a, Eigen::EigenvaluesOnly);
        vals = solver.eigenvalues().reverse();
    }
    const double amax = vals(0);
    return amax + std::log((vals.array() - amax).exp().sum());
}

DensityMatrix embed_state(const SupportFrame& frame, const ExponentState& st) {
    Matrix in_support = st.sys.vectors * st.probs.asDiagonal() * st.sys.vectors.adjoint();
    Matrix full = frame.basis * in_support * frame.basis.adjoint();
    const double tol = std::max(1e-9, 1e-12 * full.cwiseAbs().maxCoeff());
    return DensityMatrix(HermitianOperator(std::move(full), tol));
}

}  // namespace

DensityMatrix gibbs_state(const Eigen::VectorXd& kappa, const ObservableSet& observables,
                          const DensityMatrix& sigma) {
    if (kappa.size() != observables.size()) {
        throw std::invalid_argument("gibbs_state: kappa length does not match observables");
    }
    const SupportFrame frame = project_onto_support(observables, sigma);
    return embed_state(frame, exponentiate(exponent_matrix(frame, kappa)));
}

double log_partition(const Eigen::VectorXd& kappa, const ObservableSet& observables,
                     const DensityMatrix& sigma) {
    if (kappa.size() != observables.size()) {
        throw std::invalid_argument("log_partition: kappa length does not match observables");
    }
    const SupportFrame frame = project_onto_support(observables, sigma);
    return log_z_of(exponent_matrix(frame, kappa));
}

Eigen::MatrixXd kubo_mori_covariance(const DensityMatrix& mu, const ObservableSet& observables) {
    if (observables.dim() != mu.dim()) {
        throw std::invalid_argument("kubo_mori_covariance: dimension mismatch");
    }
    const Matrix& u = mu.eigenvectors();
    std::vector<Matrix> centered;
    centered.reserve(static_cast<std::size_t>(observables.size()));
    for (int b = 0; b < observables.size(); ++b) {
        Matrix fe = u.adjoint() * observables[b].matrix() * u;
        double mean = 0.0;
        for (Eigen::Index k = 0; k < mu.eigenvalues().size(); ++k) {
            mean += mu.eigenvalues()(k) * fe(k, k).real();
        }
        fe -= mean * Matrix::Identity(fe.rows(), fe.cols());
        centered.push_back(std::move(fe));
    }
    return km_matrix(mu.eigenvalues(), centered);
}

FitReport fit_gibbs(const ObservableSet& observables, const Eigen::VectorXd& targets,
                    const DensityMatrix& sigma, const FitOptions& options) {
    const int p = observables.size();
    if (targets.size() != p) {
        throw std::invalid_argument("fit_gibbs: targets length does not match observables");
    }
    if (p == 0) {
        return FitReport{GibbsModel{sigma, observables, Eigen::VectorXd(0), sigma, 0.0}, 0, 0.0, true};
    }

    const SupportFrame frame = project_onto_support(observables, sigma);
    const int r = static_cast<int>(frame.log_eigs.size());

    // Traceless parts relative to the support subspace and their targets.
    std::vector<Matrix> traceless(static_cast<std::size_t>(p));
    Eigen::VectorXd shifted_targets(p);
    for (int b = 0; b < p; ++b) {
        const double mean_diag = frame.ops[static_cast<std::size_t>(b)].trace().real() / r;
        traceless[static_cast<std::size_t>(b)] =
            frame.ops[static_cast<std::size_t>(b)] - mean_diag * Matrix::Identity(r, r);
        shifted_targets(b) = targets(b) - mean_diag;
    }

    // Orthonormalize (Hilbert-Schmidt) for conditioning. Directions whose
    // Gram eigenvalue collapses after the support projection carry no free
    // parameter; their target component must already be satisfied.
    Eigen::MatrixXd gram(p, p);
    for (int a = 0; a < p; ++a) {
        for (int b = a; b < p; ++b) {
            const double g = (traceless[static_cast<std::size_t>(a)] *
                              traceless[static_cast<std::size_t>(b)])
                                 .trace()
                                 .real();
            gram(a, b) = g;
            gram(b, a) = g;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> gram_eig(gram);
    const double gram_cutoff = std::max(1e-13, 1e-12 * gram_eig.eigenvalues().maxCoeff());

    std::vector<int> kept;
    for (int c = 0; c < p; ++c) {
        if (gram_eig.eigenvalues()(c) > gram_cutoff) {
            kept.push_back(c);
        } else {
            const double fixed_component = gram_eig.eigenvectors().col(c).dot(shifted_targets);
            if (std::abs(fixed_component) > options.tolerance) {
                throw InfeasibleTargets(
                    "fit_gibbs: targets have a component along a direction that is fixed on the "
                    "reference state's support (mismatch " +
                    std::to_string(std::abs(fixed_component)) + ")");
            }
        }
    }
    const int q = static_cast<int>(kept.size());

    std::vector<Matrix> ortho_ops(static_cast<std::size_t>(q));
    Eigen::VectorXd ortho_targets(q);
    Eigen::MatrixXd kappa_from_eta(p, q);
    for (int c = 0; c < q; ++c) {
        const int idx = kept[static_cast<std::size_t>(c)];
        const double inv_norm = 1.0 / std::sqrt(gram_eig.eigenvalues()(idx));
        Matrix op = Matrix::Zero(r, r);
        for (int b = 0; b < p; ++b) {
            op += gram_eig.eigenvectors()(b, idx) * traceless[static_cast<std::size_t>(b)];
        }
        ortho_ops[static_cast<std::size_t>(c)] = inv_norm * op;
        ortho_targets(c) = inv_norm * gram_eig.eigenvectors().col(idx).dot(shifted_targets);
        kappa_from_eta.col(c) = inv_norm * gram_eig.eigenvectors().col(idx);
    }

    SupportFrame reduced;
    reduced.basis = frame.basis;
    reduced.log_eigs = frame.log_eigs;
    reduced.ops = ortho_ops;

    Eigen::VectorXd eta = Eigen::VectorXd::Zero(q);
    Eigen::VectorXd kappa = Eigen::VectorXd::Zero(p);
    int iterations = 0;
    bool converged = false;
    double residual = 0.0;
    ExponentState state = exponentiate(exponent_matrix(reduced, eta));

    for (int iter = 0; iter <= options.max_iterations; ++iter) {
        // Expectations of the user observables and of the internal basis.
        Eigen::VectorXd expect_user(p);
        for (int b = 0; b < p; ++b) {
            const Matrix fe = state.sys.vectors.adjoint() *
                              traceless[static_cast<std::size_t>(b)] * state.sys.vectors;
            double mean = 0.0;
            for (int k = 0; k < r; ++k) mean += state.probs(k) * fe(k, k).real();
            expect_user(b) = mean;
        }
        residual = (shifted_targets - expect_user).cwiseAbs().maxCoeff();

        if (residual <= options.tolerance) {
            // Targets on the boundary of the attainable set drive the state
            // to a rank collapse before the Lagrange parameters diverge;
            // such fits satisfy the residual test but do not correspond to
            // any interior solution.
            const double rel_min = state.probs(r - 1) / state.probs(0);
            if (r > 1 && rel_min <= 1e-10) {
                throw InfeasibleTargets(
                    "fit_gibbs: targets lie on the boundary of the attainable set (fitted state "
                    "support collapsed, relative minimum eigenvalue " +
                    std::to_string(rel_min) + ")");
            }
            converged = true;
            break;
        }
        if (iter == options.max_iterations || q == 0) break;

        std::vector<Matrix> centered(static_cast<std::size_t>(q));
        Eigen::VectorXd grad(q);
        for (int c = 0; c < q; ++c) {
            Matrix fe = state.sys.vectors.adjoint() * ortho_ops[static_cast<std::size_t>(c)] *
                        state.sys.vectors;
            double mean = 0.0;
            for (int k = 0; k < r; ++k) mean += state.probs(k) * fe(k, k).real();
            grad(c) = ortho_targets(c) - mean;
            fe -= mean * Matrix::Identity(r, r);
            centered[static_cast<std::size_t>(c)] = std::move(fe);
        }

        Eigen::MatrixXd hess = km_matrix(state.probs, centered);
        Eigen::VectorXd delta = -Eigen::LDLT<Eigen::MatrixXd>(hess).solve(grad);
        double descent = grad.dot(delta);
        if (!delta.allFinite() || descent >= 0.0) {
            hess += (1e-12 * hess.trace() / q + 1e-300) * Eigen::MatrixXd::Identity(q, q);
            delta = -Eigen::LDLT<Eigen::MatrixXd>(hess).solve(grad);
            descent = grad.dot(delta);
            if (!delta.allFinite() || descent >= 0.0) {
                delta = -grad;
                descent = grad.dot(delta);
            }
        }

        // Armijo backtracking on psi(eta) = ln Z(eta) + eta . targets. The
        // slack term keeps the test meaningful once the predicted decrease
        // drops below the floating-point resolution of psi.
        const double psi0 = state.log_z + eta.dot(ortho_targets);
        const double slack = 1e-14 * (1.0 + std::abs(psi0));
        double step = 1.0;
        bool moved = false;
        for (int backtrack = 0; backtrack < 60; ++backtrack) {
            const Eigen::VectorXd trial = eta + step * delta;
            const double psi = log_z_of(exponent_matrix(reduced, trial)) + trial.dot(ortho_targets);
            if (psi <= psi0 + 1e-4 * step * descent + slack) {
                eta = trial;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;  // numerically flat; the residual check decides

        ++iterations;
        kappa = kappa_from_eta * eta;
        if (kappa.cwiseAbs().maxCoeff() > options.kappa_divergence) {
            throw InfeasibleTargets(
                "fit_gibbs: Lagrange parameters diverged (|kappa|_inf > " +
                std::to_string(options.kappa_divergence) +
                "); targets lie outside the attainable set");
        }
        state = exponentiate(exponent_matrix(reduced, eta));
    }

    if (!converged) {
        if (q == 0) {
            throw InfeasibleTargets(
                "fit_gibbs: no adjustable directions remain on the reference state's support "
                "and the targets are not satisfied (residual " +
                std::to_string(residual) + ")");
        }
        throw NonConvergence("fit_gibbs: residual " + std::to_string(residual) + " after " +
                             std::to_string(iterations) + " Newton steps");
    }

    DensityMatrix fitted = embed_state(reduced, state);
    const double log_z = log_partition(kappa, observables, sigma);
    return FitReport{GibbsModel{sigma, observables, kappa, fitted, log_z}, iterations, residual,
                     true};
}

double pythagoras_residual(const DensityMatrix& mu, const DensityMatrix& rho,
                           const ObservableSet& observables) {
    Eigen::VectorXd values(observables.size());
    for (int b = 0; b < observables.size(); ++b) {
        values(b) = expectation(mu, observables[b]);
    }
    const DensityMatrix projected = fit_gibbs(observables, values, rho).model.state;
    return std::abs(relative_entropy(mu, rho) - relative_entropy(mu, projected) -
                    relative_entropy(projected, rho));
}

}  // namespace gibbsfit
