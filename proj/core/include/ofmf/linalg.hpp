#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace ofmf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Eigendecomposition S = Q diag(psi) Q^T of a symmetric positive
/// semidefinite matrix. Eigenvalues are sorted descending, ties kept in the
/// order the rotations produced them. Column i of Q pairs with psi(i).
struct SymEig {
    Matrix Q;
    Vector psi;
};

/// Solves A X = B for symmetric positive-definite A by Cholesky factorization.
///
/// Throws ParameterError when A is not square, is asymmetric beyond 1e-12
/// (relative to its largest entry) or B has the wrong row count.
/// Throws SingularMatrixError when an entry is non-finite or a pivot drops
/// below 1e-14 times the largest diagonal entry.
Matrix solve_spd(const Matrix& A, const Matrix& B);
Vector solve_spd(const Matrix& A, const Vector& b);

/// Returns (alpha I + beta v v^T)^{-1} B through the Sherman-Morrison identity.
/// Requires alpha > 0 and alpha + beta ||v||^2 > 0.
Matrix rank1_update_solve(double alpha, double beta, const Vector& v, const Matrix& B);

/// Returns (rho I + v v^T)^{-1} B. Throws ParameterError for rho <= 0.
Matrix rank1_reg_solve(double rho, const Vector& v, const Matrix& B);

/// Cyclic Jacobi eigendecomposition of a symmetric PSD matrix.
///
/// Sweeps stop once the off-diagonal Frobenius mass falls under
/// 1e-12 ||S||_F, or after 100 sweeps. Eigenvalues in [-1e-12 ||S||, 0) are
/// clamped to zero; anything more negative is rejected as not PSD.
SymEig sym_eig(const Matrix& S);

/// Real roots of sum_k coeffs[k] x^k (ascending powers), sorted ascending.
///
/// Leading coefficients with magnitude at most 1e-14 max|coeff| are trimmed.
/// Roots are isolated between consecutive real critical points (found
/// recursively from the derivative), so each bracket holds at most one simple
/// root; brackets are refined by Newton steps safeguarded with bisection.
/// A critical point where the polynomial vanishes within tolerance is
/// reported as a multiple root. Throws ParameterError on an all-zero input.
std::vector<double> real_roots(std::span<const double> coeffs);

/// Horner evaluation of sum_k coeffs[k] x^k.
double poly_eval(std::span<const double> coeffs, double x);

/// Product of two polynomials in ascending-power form.
std::vector<double> poly_mul(std::span<const double> a, std::span<const double> b);

}  // namespace ofmf
