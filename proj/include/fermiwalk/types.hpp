#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace fermiwalk {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;
using CSparse = Eigen::SparseMatrix<cplx>;

inline constexpr cplx I{0.0, 1.0};

/// Input rejected before any computation (bad shapes, non-unitary coins, ...).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input is well-formed but outside the domain of a formula
/// (spectral radius not below one, contour enclosing a pole, ...).
class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Largest singular value.
inline double operator_norm(const CMatrix& a) {
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<CMatrix> svd(a);
    return svd.singularValues()(0);
}

/// max(‖A*A − 1‖, ‖AA* − 1‖) in operator norm.
inline double unitarity_defect(const CMatrix& a) {
    const auto n = a.rows();
    const CMatrix id = CMatrix::Identity(n, n);
    return std::max(operator_norm(a.adjoint() * a - id), operator_norm(a * a.adjoint() - id));
}

inline double hermiticity_defect(const CMatrix& a) { return operator_norm(a - a.adjoint()); }

/// Eigenvalues of a Hermitian matrix, ascending.
inline RVector hermitian_eigenvalues(const CMatrix& a) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (a + a.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

inline CVector basis_vector(Eigen::Index dim, Eigen::Index k) {
    CVector e = CVector::Zero(dim);
    e(k) = 1.0;
    return e;
}

/// Phase of z mapped into [0, 2π).
inline double phase_0_2pi(cplx z) {
    constexpr double two_pi = 6.283185307179586476925286766559;
    double p = std::arg(z);
    if (p < 0) p += two_pi;
    if (p >= two_pi) p -= two_pi;
    return p;
}

} // namespace fermiwalk
