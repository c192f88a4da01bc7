#include "gibbsfit/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace gibbsfit {

namespace {

// Rotate each column so its largest-magnitude entry (first among equals) is
// real and nonnegative, then sort descending by eigenvalue with exact ties
// broken by lexicographic (real, imag) comparison of the vectors.
void canonicalize(Eigen::VectorXd& values, Matrix& vectors) {
    const Eigen::Index d = values.size();
    for (Eigen::Index k = 0; k < d; ++k) {
        Eigen::Index anchor = 0;
        double best = -1.0;
        for (Eigen::Index i = 0; i < d; ++i) {
            const double a = std::abs(vectors(i, k));
            if (a > best + 1e-14) {
                best = a;
                anchor = i;
            }
        }
        if (best > 0.0) {
            const Complex phase = vectors(anchor, k) / best;
            vectors.col(k) *= std::conj(phase);
        }
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), 0);
    auto lex_less = [&](Eigen::Index a, Eigen::Index b) {
        for (Eigen::Index i = 0; i < d; ++i) {
            const Complex va = vectors(i, a);
            const Complex vb = vectors(i, b);
            if (va.real() != vb.real()) return va.real() < vb.real();
            if (va.imag() != vb.imag()) return va.imag() < vb.imag();
        }
        return false;
    };
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        if (values(a) != values(b)) return values(a) > values(b);
        return lex_less(a, b);
    });

    Eigen::VectorXd sorted_values(d);
    Matrix sorted_vectors(d, d);
    for (Eigen::Index k = 0; k < d; ++k) {
        sorted_values(k) = values(order[static_cast<std::size_t>(k)]);
        sorted_vectors.col(k) = vectors.col(order[static_cast<std::size_t>(k)]);
    }
    values = std::move(sorted_values);
    vectors = std::move(sorted_vectors);
}

// Closed-form Hermitian 2x2 eigensolver; the generic path costs far more
// than the arithmetic for the grid demos, which run hundreds of thousands
// of qubit decompositions.
void eig2x2(const Matrix& m, Eigen::VectorXd& values, Matrix& vectors) {
    const double a = m(0, 0).real();
    const double c = m(1, 1).real();
    const Complex b = m(0, 1);
    const double babs = std::abs(b);
    values.resize(2);
    vectors.resize(2, 2);
    if (babs == 0.0) {
        values << a, c;
        vectors.setIdentity();
        return;
    }
    const double half_sum = 0.5 * (a + c);
    const double half_diff = 0.5 * (a - c);
    const double radius = std::hypot(half_diff, babs);
    const double lo = half_sum - radius;
    const double hi = half_sum + radius;
    // Eigenvector for hi, written with the cancellation-free component:
    // (hi - c, conj(b)) when a >= c, (b, hi - a) otherwise. hi - c and
    // hi - a are then both half_diff-aligned sums, never differences.
    const double big = radius + std::abs(half_diff);
    Complex v0, v1;
    if (half_diff >= 0.0) {
        v0 = Complex(big, 0.0);
        v1 = std::conj(b);
    } else {
        v0 = b;
        v1 = Complex(big, 0.0);
    }
    const double norm = std::sqrt(std::norm(v0) + std::norm(v1));
    v0 /= norm;
    v1 /= norm;
    values << lo, hi;
    vectors(0, 0) = -std::conj(v1);
    vectors(1, 0) = std::conj(v0);
    vectors(0, 1) = v0;
    vectors(1, 1) = v1;
}

}  // namespace

HermitianOperator::HermitianOperator(Matrix entries, double tolerance) {
    if (entries.rows() != entries.cols()) {
        throw std::invalid_argument("HermitianOperator: matrix must be square");
    }
    if (entries.rows() < 2) {
        throw std::invalid_argument("HermitianOperator: dimension must be >= 2");
    }
    const double asym = (entries - entries.adjoint().eval()).cwiseAbs().maxCoeff();
    if (asym > tolerance) {
        throw std::invalid_argument("HermitianOperator: input is not Hermitian (max |A - A^dagger| = " +
                                    std::to_string(asym) + ")");
    }
    entries_ = 0.5 * (entries + entries.adjoint().eval());
}

HermitianOperator HermitianOperator::identity(int d) {
    return HermitianOperator(Matrix::Identity(d, d));
}

EigenSystem spectral_decomposition(const Matrix& hermitian) {
    EigenSystem sys;
    if (hermitian.rows() == 2) {
        eig2x2(hermitian, sys.values, sys.vectors);
    } else {
        Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian);
        if (solver.info() != Eigen::Success) {
            throw std::runtime_error("spectral_decomposition: eigensolver failed");
        }
        sys.values = solver.eigenvalues();
        sys.vectors = solver.eigenvectors();
    }
    canonicalize(sys.values, sys.vectors);
    return sys;
}

EigenSystem spectral_decomposition(const HermitianOperator& op) {
    return spectral_decomposition(op.matrix());
}

double support_cutoff(const Eigen::VectorXd& descending_eigenvalues) {
    if (descending_eigenvalues.size() == 0) return 0.0;
    return 1e-12 * std::abs(descending_eigenvalues(0));
}

DensityMatrix::DensityMatrix(const HermitianOperator& op) : op_(op) {
    const double tr = op_.matrix().trace().real();
    if (std::abs(tr - 1.0) > 1e-10) {
        throw std::invalid_argument("DensityMatrix: trace = " + std::to_string(tr) + ", expected 1");
    }
    eigs_ = spectral_decomposition(op_);
    const double min_eig = eigs_.values(eigs_.values.size() - 1);
    if (min_eig < -1e-12) {
        throw std::invalid_argument("DensityMatrix: negative eigenvalue " + std::to_string(min_eig));
    }
    support_tol_ = support_cutoff(eigs_.values);
    support_dim_ = 0;
    for (Eigen::Index k = 0; k < eigs_.values.size(); ++k) {
        if (eigs_.values(k) > support_tol_) ++support_dim_;
    }
    if (support_dim_ == 0) {
        throw std::invalid_argument("DensityMatrix: empty support");
    }
}

DensityMatrix::DensityMatrix(Matrix entries) : DensityMatrix(HermitianOperator(std::move(entries))) {}

DensityMatrix DensityMatrix::maximally_mixed(int d) {
    return DensityMatrix(Matrix::Identity(d, d) / static_cast<double>(d));
}

ObservableSet::ObservableSet(int dim, std::vector<HermitianOperator> observables,
                             std::vector<std::string> labels)
    : dim_(dim), observables_(std::move(observables)), labels_(std::move(labels)) {
    if (labels_.empty() && !observables_.empty()) {
        labels_.reserve(observables_.size());
        for (std::size_t b = 0; b < observables_.size(); ++b) {
            labels_.push_back("G" + std::to_string(b));
        }
    }
    if (labels_.size() != observables_.size()) {
        throw std::invalid_argument("ObservableSet: labels and observables differ in length");
    }
    for (const auto& g : observables_) {
        if (g.dim() != dim_) {
            throw std::invalid_argument("ObservableSet: observable dimension mismatch");
        }
    }
    const int p = size();
    if (p == 0) return;

    // Gram matrix of the traceless parts; a zero eigenvalue means some
    // combination of {identity, G_1, ..., G_p} is linearly dependent.
    std::vector<Matrix> traceless;
    traceless.reserve(static_cast<std::size_t>(p));
    for (const auto& g : observables_) {
        Matrix t = g.matrix();
        t -= (t.trace() / static_cast<double>(dim_)) * Matrix::Identity(dim_, dim_);
        traceless.push_back(std::move(t));
    }
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
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
    if (solver.eigenvalues()(0) <= 1e-10) {
        throw std::invalid_argument(
            "ObservableSet: observables are linearly dependent together with the identity "
            "(smallest Gram eigenvalue " +
            std::to_string(solver.eigenvalues()(0)) + ")");
    }
}

ObservableSet::ObservableSet(int dim, std::vector<HermitianOperator> observables)
    : ObservableSet(dim, std::move(observables), std::vector<std::string>{}) {}

ObservableSet ObservableSet::subset(const std::vector<int>& indices) const {
    std::vector<HermitianOperator> obs;
    std::vector<std::string> labels;
    obs.reserve(indices.size());
    labels.reserve(indices.size());
    for (int i : indices) {
        if (i < 0 || i >= size()) {
            throw std::out_of_range("ObservableSet::subset: index out of range");
        }
        obs.push_back(observables_[static_cast<std::size_t>(i)]);
        labels.push_back(labels_[static_cast<std::size_t>(i)]);
    }
    return ObservableSet(dim_, std::move(obs), std::move(labels));
}

double expectation(const DensityMatrix& rho, const HermitianOperator& G) {
    if (rho.dim() != G.dim()) {
        throw std::invalid_argument("expectation: dimension mismatch");
    }
    return (rho.matrix() * G.matrix()).trace().real();
}

double von_neumann_entropy(const DensityMatrix& rho) {
    const Eigen::VectorXd& lam = rho.eigenvalues();
    const double tol = rho.support_tolerance();
    double s = 0.0;
    for (Eigen::Index k = 0; k < lam.size(); ++k) {
        if (lam(k) > tol) s -= lam(k) * std::log(lam(k));
    }
    return std::max(0.0, s);
}

double relative_entropy(const DensityMatrix& mu, const DensityMatrix& rho) {
    if (mu.dim() != rho.dim()) {
        throw std::invalid_argument("relative_entropy: dimension mismatch");
    }
    const int r = rho.support_dim();
    const int d = rho.dim();

    // Weight of mu outside rho's support.
    double leakage = 0.0;
    for (int k = r; k < d; ++k) {
        const auto v = rho.eigenvectors().col(k);
        leakage += (v.adjoint() * mu.matrix() * v)(0, 0).real();
    }
    if (leakage >= mu.support_tolerance()) {
        return std::numeric_limits<double>::infinity();
    }

    double cross = 0.0;  // tr(mu ln rho) over rho's support
    for (int k = 0; k < r; ++k) {
        const auto v = rho.eigenvectors().col(k);
        const double w = (v.adjoint() * mu.matrix() * v)(0, 0).real();
        cross += w * std::log(rho.eigenvalues()(k));
    }
    return std::max(0.0, -von_neumann_entropy(mu) - cross);
}

HermitianOperator hermitian_function(const HermitianOperator& A,
                                     const std::function<double(double)>& f) {
    const EigenSystem sys = spectral_decomposition(A);
    Eigen::VectorXd mapped(sys.values.size());
    for (Eigen::Index k = 0; k < sys.values.size(); ++k) {
        mapped(k) = f(sys.values(k));
    }
    Matrix result = sys.vectors * mapped.asDiagonal() * sys.vectors.adjoint();
    const double tol = std::max(1e-9, 1e-12 * result.cwiseAbs().maxCoeff());
    return HermitianOperator(std::move(result), tol);
}

HermitianOperator hermitian_exp(const HermitianOperator& A) {
    return hermitian_function(A, [](double x) { return std::exp(x); });
}

HermitianOperator hermitian_log(const HermitianOperator& A) {
    const EigenSystem sys = spectral_decomposition(A);
    const double cutoff = support_cutoff(sys.values);
    const double min_eig = sys.values(sys.values.size() - 1);
    if (sys.values(0) <= 0.0 || min_eig <= cutoff) {
        throw std::domain_error("hermitian_log: eigenvalue " + std::to_string(min_eig) +
                                " at or below the support cutoff");
    }
    Eigen::VectorXd mapped(sys.values.size());
    for (Eigen::Index k = 0; k < sys.values.size(); ++k) {
        mapped(k) = std::log(sys.values(k));
    }
    Matrix result = sys.vectors * mapped.asDiagonal() * sys.vectors.adjoint();
    return HermitianOperator(std::move(result), 1e-9);
}

HermitianOperator pauli_x() {
    Matrix m(2, 2);
    m << 0.0, 1.0, 1.0, 0.0;
    return HermitianOperator(std::move(m));
}

HermitianOperator pauli_y() {
    Matrix m(2, 2);
    m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
    return HermitianOperator(std::move(m));
}

HermitianOperator pauli_z() {
    Matrix m(2, 2);
    m << 1.0, 0.0, 0.0, -1.0;
    return HermitianOperator(std::move(m));
}

Matrix kronecker(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
    const EigenSystem sys = spectral_decomposition(Matrix(a.matrix() - b.matrix()));
    return 0.5 * sys.values.cwiseAbs().sum();
}

}  // namespace gibbsfit
