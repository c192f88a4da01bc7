#ifndef GIBBSFIT_OPERATORS_HPP
#define GIBBSFIT_OPERATORS_HPP

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <string>
#include <vector>

namespace gibbsfit {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

/// A d x d complex Hermitian matrix. The stored form is exactly Hermitian:
/// construction verifies |A_ij - conj(A_ji)| <= tolerance entrywise and then
/// replaces A by (A + A^dagger)/2.
class HermitianOperator {
public:
    explicit HermitianOperator(Matrix entries, double tolerance = 1e-12);

    int dim() const { return static_cast<int>(entries_.rows()); }
    const Matrix& matrix() const { return entries_; }

    static HermitianOperator identity(int d);

private:
    Matrix entries_;
};

/// Eigenpairs of a Hermitian matrix in canonical form: eigenvalues in
/// descending order, degenerate pairs tie-broken by lexicographic eigenvector
/// order, each eigenvector's largest-magnitude entry rotated to be real and
/// nonnegative. Identical input bits give identical output bits.
struct EigenSystem {
    Eigen::VectorXd values;  // descending
    Matrix vectors;          // columns, orthonormal
};

EigenSystem spectral_decomposition(const Matrix& hermitian);
EigenSystem spectral_decomposition(const HermitianOperator& op);

/// Eigenvalues at or below 1e-12 * lambda_max count as exact zeros.
double support_cutoff(const Eigen::VectorXd& descending_eigenvalues);

/// Positive semidefinite, unit-trace Hermitian operator with its spectrum
/// cached at construction. Immutable; safe to share across threads.
class DensityMatrix {
public:
    explicit DensityMatrix(const HermitianOperator& op);
    explicit DensityMatrix(Matrix entries);

    static DensityMatrix maximally_mixed(int d);

    int dim() const { return op_.dim(); }
    const Matrix& matrix() const { return op_.matrix(); }
    const HermitianOperator& op() const { return op_; }

    const Eigen::VectorXd& eigenvalues() const { return eigs_.values; }
    const Matrix& eigenvectors() const { return eigs_.vectors; }

    /// Number of eigenvalues above the support cutoff.
    int support_dim() const { return support_dim_; }
    double support_tolerance() const { return support_tol_; }

private:
    HermitianOperator op_;
    EigenSystem eigs_;
    double support_tol_ = 0.0;
    int support_dim_ = 0;
};

/// Ordered list of Hermitian observables on a common Hilbert space.
/// Construction rejects sets that are linearly dependent once the identity
/// component is removed (smallest Gram eigenvalue of the traceless parts
/// must exceed 1e-10). The empty set is allowed.
class ObservableSet {
public:
    ObservableSet(int dim, std::vector<HermitianOperator> observables,
                  std::vector<std::string> labels);
    ObservableSet(int dim, std::vector<HermitianOperator> observables);

    int dim() const { return dim_; }
    int size() const { return static_cast<int>(observables_.size()); }
    const HermitianOperator& operator[](int b) const { return observables_[static_cast<std::size_t>(b)]; }
    const std::vector<HermitianOperator>& observables() const { return observables_; }
    const std::vector<std::string>& labels() const { return labels_; }

    ObservableSet subset(const std::vector<int>& indices) const;

private:
    int dim_;
    std::vector<HermitianOperator> observables_;
    std::vector<std::string> labels_;
};

/// tr(rho G). The imaginary residue (< 1e-12 for valid inputs) is discarded.
double expectation(const DensityMatrix& rho, const HermitianOperator& G);

/// -sum_k lambda_k ln lambda_k over the support; 0 ln 0 := 0. In [0, ln d].
double von_neumann_entropy(const DensityMatrix& rho);

/// tr(mu ln mu - mu ln rho) when supp(mu) lies inside supp(rho), +infinity
/// otherwise. The infinite branch is IEEE +inf, so it orders above every
/// finite value and poisons sums.
double relative_entropy(const DensityMatrix& mu, const DensityMatrix& rho);

/// U f(Lambda) U^dagger from the spectral decomposition A = U Lambda U^dagger.
HermitianOperator hermitian_function(const HermitianOperator& A,
                                     const std::function<double(double)>& f);

HermitianOperator hermitian_exp(const HermitianOperator& A);

/// Matrix logarithm; throws std::domain_error if any eigenvalue sits at or
/// below the support cutoff.
HermitianOperator hermitian_log(const HermitianOperator& A);

// Qubit building blocks and tensor products, used by the demos and tests.
HermitianOperator pauli_x();
HermitianOperator pauli_y();
HermitianOperator pauli_z();
Matrix kronecker(const Matrix& a, const Matrix& b);

/// Half the trace norm of the difference of two states.
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

}  // namespace gibbsfit

#endif  // GIBBSFIT_OPERATORS_HPP
