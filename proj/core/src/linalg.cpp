#include "ofmf/linalg.hpp"

#include "ofmf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace ofmf {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kPivotFloor = 1e-14;
constexpr double kJacobiTol = 1e-12;
constexpr int kJacobiMaxSweeps = 100;
constexpr double kLeadTrim = 1e-14;
constexpr double kMachineEps = std::numeric_limits<double>::epsilon();

void require_symmetric(const Matrix& A, const char* what) {
    if (A.rows() != A.cols() || A.rows() == 0) {
        throw ParameterError(std::string(what) + ": matrix must be square and non-empty");
    }
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < A.cols(); ++j) {
            if (std::abs(A(i, j) - A(j, i)) > kSymmetryTol * scale) {
                throw ParameterError(std::string(what) + ": matrix is not symmetric");
            }
        }
    }
}

// Lower-triangular Cholesky factor of A, with the pivot floor applied.
Matrix cholesky(const Matrix& A) {
    const Eigen::Index n = A.rows();
    if (!A.allFinite()) {
        throw SingularMatrixError("solve_spd: non-finite matrix entry");
    }
    const double floor = kPivotFloor * A.diagonal().cwiseAbs().maxCoeff();
    Matrix L = Matrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double pivot = A(j, j);
        for (Eigen::Index k = 0; k < j; ++k) pivot -= L(j, k) * L(j, k);
        if (!(pivot > floor)) {
            throw SingularMatrixError("solve_spd: pivot " + std::to_string(j) +
                                      " below floor (matrix not positive definite)");
        }
        const double ljj = std::sqrt(pivot);
        L(j, j) = ljj;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            double s = A(i, j);
            for (Eigen::Index k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
            L(i, j) = s / ljj;
        }
    }
    return L;
}

std::vector<double> trimmed(std::span<const double> coeffs) {
    std::vector<double> p(coeffs.begin(), coeffs.end());
    double biggest = 0.0;
    for (double c : p) biggest = std::max(biggest, std::abs(c));
    if (biggest == 0.0 || !std::isfinite(biggest)) {
        throw ParameterError("real_roots: polynomial is zero or non-finite");
    }
    while (p.size() > 1 && std::abs(p.back()) <= kLeadTrim * biggest) p.pop_back();
    return p;
}

std::vector<double> derivative(const std::vector<double>& p) {
    std::vector<double> dp;
    for (std::size_t k = 1; k < p.size(); ++k) dp.push_back(static_cast<double>(k) * p[k]);
    return dp;
}

// Rounding-error envelope of Horner's rule at x.
double eval_error_bound(const std::vector<double>& p, double x) {
    double acc = 0.0;
    for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * std::abs(x) + std::abs(*it);
    return 4.0 * static_cast<double>(p.size()) * kMachineEps * acc;
}

// Root in [a, b] given p(a) and p(b) of opposite signs.
double refine(const std::vector<double>& p, const std::vector<double>& dp, double a, double b,
              double fa) {
    double x = 0.5 * (a + b);
    for (int it = 0; it < 200; ++it) {
        const double fx = poly_eval(p, x);
        if (fx == 0.0) return x;
        if ((fx < 0.0) == (fa < 0.0)) {
            a = x;
            fa = fx;
        } else {
            b = x;
        }
        const double slope = poly_eval(dp, x);
        double next = (slope != 0.0) ? x - fx / slope : 0.5 * (a + b);
        if (!(next > a && next < b)) next = 0.5 * (a + b);
        const double width = 4.0 * kMachineEps * std::max(1.0, std::abs(next));
        if (std::abs(next - x) <= width || (b - a) <= width) return next;
        x = next;
    }
    return x;
}

std::vector<double> roots_recursive(const std::vector<double>& p) {
    const std::size_t degree = p.size() - 1;
    if (degree == 0) return {};
    if (degree == 1) return {-p[0] / p[1]};

    const std::vector<double> dp = derivative(p);
    const std::vector<double> critical = roots_recursive(trimmed(dp));

    double bound = 0.0;
    for (std::size_t k = 0; k < degree; ++k) bound = std::max(bound, std::abs(p[k] / p[degree]));
    bound += 1.0;

    std::vector<double> knots;
    knots.push_back(-bound);
    for (double c : critical) {
        if (c > -bound && c < bound) knots.push_back(c);
    }
    knots.push_back(bound);

    std::vector<double> roots;
    auto push_unique = [&roots](double r) {
        if (roots.empty() || std::abs(r - roots.back()) > 1e-12 * std::max(1.0, std::abs(r))) {
            roots.push_back(r);
        }
    };

    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
        const double a = knots[k];
        const double b = knots[k + 1];
        const double fa = poly_eval(p, a);
        const double fb = poly_eval(p, b);
        const bool a_zero = std::abs(fa) <= eval_error_bound(p, a);
        const bool b_zero = std::abs(fb) <= eval_error_bound(p, b);
        if (a_zero && k > 0) push_unique(a);
        if (!a_zero && !b_zero && ((fa < 0.0) != (fb < 0.0))) {
            push_unique(refine(p, dp, a, b, fa));
        }
    }
    return roots;
}

}  // namespace

double poly_eval(std::span<const double> coeffs, double x) {
    double acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
    return acc;
}

std::vector<double> poly_mul(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) return {};
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    }
    return out;
}

Matrix solve_spd(const Matrix& A, const Matrix& B) {
    require_symmetric(A, "solve_spd");
    if (B.rows() != A.rows()) {
        throw ParameterError("solve_spd: right-hand side has " + std::to_string(B.rows()) +
                             " rows, expected " + std::to_string(A.rows()));
    }
    if (!B.allFinite()) throw SingularMatrixError("solve_spd: non-finite right-hand side");
    const Matrix L = cholesky(A);
    const Eigen::Index n = A.rows();
    Matrix X = B;
    for (Eigen::Index c = 0; c < X.cols(); ++c) {
        for (Eigen::Index i = 0; i < n; ++i) {
            double s = X(i, c);
            for (Eigen::Index k = 0; k < i; ++k) s -= L(i, k) * X(k, c);
            X(i, c) = s / L(i, i);
        }
        for (Eigen::Index i = n - 1; i >= 0; --i) {
            double s = X(i, c);
            for (Eigen::Index k = i + 1; k < n; ++k) s -= L(k, i) * X(k, c);
            X(i, c) = s / L(i, i);
        }
    }
    return X;
}

Vector solve_spd(const Matrix& A, const Vector& b) {
    const Matrix X = solve_spd(A, Matrix(b));
    return X.col(0);
}

Matrix rank1_update_solve(double alpha, double beta, const Vector& v, const Matrix& B) {
    if (!(alpha > 0.0)) throw ParameterError("rank1_update_solve: alpha must be positive");
    if (v.size() != B.rows()) throw ParameterError("rank1_update_solve: dimension mismatch");
    const double denom = alpha + beta * v.squaredNorm();
    if (!(denom > 0.0)) throw ParameterError("rank1_update_solve: matrix is not positive definite");
    // (aI + b vv^T)^{-1} = (1/a) [I - b vv^T / (a + b v^T v)]
    const Eigen::RowVectorXd vtB = v.transpose() * B;
    return (B - (beta / denom) * v * vtB) / alpha;
}

Matrix rank1_reg_solve(double rho, const Vector& v, const Matrix& B) {
    if (!(rho > 0.0)) throw ParameterError("rank1_reg_solve: rho must be positive");
    return rank1_update_solve(rho, 1.0, v, B);
}

SymEig sym_eig(const Matrix& S) {
    require_symmetric(S, "sym_eig");
    const Eigen::Index n = S.rows();
    Matrix A = 0.5 * (S + S.transpose());
    Matrix V = Matrix::Identity(n, n);
    const double norm = A.norm();
    const double target = kJacobiTol * norm;

    auto off_diagonal = [&A, n]() {
        double s = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                if (i != j) s += A(i, j) * A(i, j);
        return std::sqrt(s);
    };

    for (int sweep = 0; sweep < kJacobiMaxSweeps && off_diagonal() > target; ++sweep) {
        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = A(p, q);
                if (apq == 0.0) continue;
                const double tau = (A(q, q) - A(p, p)) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = A(k, p);
                    const double akq = A(k, q);
                    A(k, p) = c * akp - s * akq;
                    A(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = A(p, k);
                    const double aqk = A(q, k);
                    A(p, k) = c * apk - s * aqk;
                    A(q, k) = s * apk + c * aqk;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = V(k, p);
                    const double vkq = V(k, q);
                    V(k, p) = c * vkp - s * vkq;
                    V(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&A](Eigen::Index a, Eigen::Index b) { return A(a, a) > A(b, b); });

    const double clamp = kJacobiTol * std::max(1.0, norm);
    SymEig out{Matrix(n, n), Vector(n)};
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index src = order[static_cast<std::size_t>(i)];
        double value = A(src, src);
        if (value < 0.0) {
            if (value < -clamp) throw ParameterError("sym_eig: matrix is not positive semidefinite");
            value = 0.0;
        }
        out.psi(i) = value;
        out.Q.col(i) = V.col(src);
    }
    return out;
}

std::vector<double> real_roots(std::span<const double> coeffs) {
    const std::vector<double> p = trimmed(coeffs);
    std::vector<double> roots = roots_recursive(p);
    std::sort(roots.begin(), roots.end());
    return roots;
}

}  // namespace ofmf
