#include <gtest/gtest.h>

#include "ofmf/errors.hpp"
#include "ofmf/linalg.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

using namespace ofmf;
using ofmf::testing::Draw;
namespace oracle = ofmf::testing;

TEST(SolveSpd, IdentityReturnsRhs) {
    Matrix B(2, 1);
    B << 3, 4;
    EXPECT_EQ(solve_spd(Matrix::Identity(2, 2), B), B);
}

TEST(SolveSpd, Scalar) {
    Matrix A(1, 1), B(1, 1);
    A << 2;
    B << 6;
    EXPECT_DOUBLE_EQ(solve_spd(A, B)(0, 0), 3.0);
}

TEST(SolveSpd, MatchesAdjugateInverse) {
    Draw draw(11);
    for (int rep = 0; rep < 50; ++rep) {
        const Matrix A = draw.spd(4);
        const Matrix B = draw.gaussian(4, 3);
        const Matrix X = solve_spd(A, B);
        EXPECT_LE((A * X - B).norm(), 1e-9 * B.norm());
        EXPECT_LE((X - oracle::adjugate_inverse(A) * B).norm(), 1e-9 * X.norm());
    }
}

TEST(SolveSpd, VectorOverload) {
    Draw draw(3);
    const Matrix A = draw.spd(5);
    const Vector b = draw.vector(5);
    EXPECT_LE((A * solve_spd(A, b) - b).norm(), 1e-12);
}

TEST(SolveSpd, Errors) {
    Matrix asym(2, 2);
    asym << 1, 2, 0, 1;
    EXPECT_THROW(solve_spd(asym, Matrix(Matrix::Ones(2, 1))), ParameterError);
    EXPECT_THROW(solve_spd(Matrix::Identity(2, 3), Matrix(Matrix::Ones(2, 1))), ParameterError);
    EXPECT_THROW(solve_spd(Matrix::Identity(2, 2), Matrix(Matrix::Ones(3, 1))), ParameterError);

    Matrix indefinite(2, 2);
    indefinite << 1, 2, 2, 1;
    EXPECT_THROW(solve_spd(indefinite, Matrix(Matrix::Ones(2, 1))), SingularMatrixError);

    Matrix nan = Matrix::Identity(2, 2);
    nan(1, 1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(solve_spd(nan, Matrix(Matrix::Ones(2, 1))), SingularMatrixError);
}

TEST(Rank1RegSolve, ZeroDirection) {
    Matrix B(2, 2);
    B << 1, 2, 3, 4;
    EXPECT_TRUE(rank1_reg_solve(2.0, Vector::Zero(2), B).isApprox(B / 2.0));
}

TEST(Rank1RegSolve, Scalar) {
    Matrix B(1, 1);
    B << 2;
    EXPECT_DOUBLE_EQ(rank1_reg_solve(1.0, Vector::Ones(1), B)(0, 0), 1.0);
}

TEST(Rank1RegSolve, MatchesDirectSolve) {
    Draw draw(5);
    for (int rep = 0; rep < 1000; ++rep) {
        const int d = draw.integer(1, 8);
        const double rho = draw.uniform(1e-3, 10.0);
        const Vector v = draw.vector(d, -3, 3);
        const Matrix B = draw.gaussian(d, draw.integer(1, 4));
        const Matrix A = rho * Matrix::Identity(d, d) + v * v.transpose();
        const Matrix X = rank1_reg_solve(rho, v, B);
        ASSERT_LE((X - solve_spd(A, B)).norm(), 1e-10 * std::max(1.0, X.norm()));
    }
}

TEST(Rank1RegSolve, RejectsNonPositiveRho) {
    EXPECT_THROW(rank1_reg_solve(0.0, Vector::Ones(2), Matrix(Matrix::Ones(2, 1))), ParameterError);
    EXPECT_THROW(rank1_reg_solve(-1.0, Vector::Ones(2), Matrix(Matrix::Ones(2, 1))), ParameterError);
}

TEST(Rank1UpdateSolve, GeneralCoefficients) {
    Draw draw(9);
    const Vector v = draw.vector(4);
    const Matrix B = draw.gaussian(4, 2);
    const Matrix A = 0.5 * Matrix::Identity(4, 4) + 3.0 * v * v.transpose();
    EXPECT_LE((rank1_update_solve(0.5, 3.0, v, B) - solve_spd(A, B)).norm(), 1e-10);
}

namespace {

void expect_valid_eig(const Matrix& S, const SymEig& e) {
    const auto n = S.rows();
    EXPECT_LE((e.Q.transpose() * e.Q - Matrix::Identity(n, n)).norm(), 1e-10);
    EXPECT_LE((e.Q * e.psi.asDiagonal() * e.Q.transpose() - S).norm(), 1e-9 * std::max(1.0, S.norm()));
    for (Eigen::Index i = 0; i < n; ++i) EXPECT_GE(e.psi(i), -1e-12);
    for (Eigen::Index i = 1; i < n; ++i) EXPECT_GE(e.psi(i - 1), e.psi(i));
}

}  // namespace

TEST(SymEig, Identity) {
    const Matrix S = Matrix::Identity(3, 3);
    const SymEig e = sym_eig(S);
    EXPECT_TRUE(e.psi.isApprox(Vector::Ones(3)));
    expect_valid_eig(S, e);
}

TEST(SymEig, Diagonal) {
    Matrix S = Matrix::Zero(2, 2);
    S(0, 0) = 1;
    S(1, 1) = 4;
    const SymEig e = sym_eig(S);
    EXPECT_NEAR(e.psi(0), 4.0, 1e-14);
    EXPECT_NEAR(e.psi(1), 1.0, 1e-14);
    expect_valid_eig(S, e);
}

TEST(SymEig, GramMatrices) {
    Draw draw(21);
    for (int rep = 0; rep < 200; ++rep) {
        const int d = draw.integer(1, 8);
        const Matrix U = draw.gaussian(d, draw.integer(1, 12));
        const Matrix S = U * U.transpose();
        expect_valid_eig(S, sym_eig(S));
    }
}

TEST(SymEig, RankDeficientClampsToZero) {
    Draw draw(2);
    const Matrix U = draw.gaussian(5, 2);
    const SymEig e = sym_eig(U * U.transpose());
    for (Eigen::Index i = 2; i < 5; ++i) EXPECT_GE(e.psi(i), 0.0);
}

TEST(SymEig, RejectsAsymmetric) {
    Matrix S(2, 2);
    S << 1, 1, 0, 1;
    EXPECT_THROW(sym_eig(S), ParameterError);
}

TEST(RealRoots, DifferenceOfSquares) {
    const std::vector<double> c{-1, 0, 1};
    const auto r = real_roots(c);
    ASSERT_EQ(r.size(), 2U);
    EXPECT_NEAR(r[0], -1.0, 1e-14);
    EXPECT_NEAR(r[1], 1.0, 1e-14);
}

TEST(RealRoots, Quadratic) {
    const std::vector<double> c{6, -5, 1};
    const auto r = real_roots(c);
    ASSERT_EQ(r.size(), 2U);
    EXPECT_NEAR(r[0], 2.0, 1e-14);
    EXPECT_NEAR(r[1], 3.0, 1e-14);
}

TEST(RealRoots, NoRealRoots) {
    const std::vector<double> c{1, 0, 1};
    EXPECT_TRUE(real_roots(c).empty());
}

TEST(RealRoots, TrimsVanishingLeadingCoefficients) {
    const std::vector<double> c{-2, 1, 0, 1e-20};
    const auto r = real_roots(c);
    ASSERT_EQ(r.size(), 1U);
    EXPECT_NEAR(r[0], 2.0, 1e-14);
}

TEST(RealRoots, DoubleRoot) {
    const std::vector<double> c{1, -2, 1};
    const auto r = real_roots(c);
    ASSERT_FALSE(r.empty());
    for (double x : r) EXPECT_NEAR(x, 1.0, 1e-7);
}

TEST(RealRoots, Degree6Product) {
    const std::vector<double> roots{-3.5, -1.25, 0.1, 0.75, 2.0, 40.0};
    const auto r = real_roots(oracle::poly_from_roots(roots, 2.5));
    ASSERT_EQ(r.size(), roots.size());
    for (std::size_t i = 0; i < roots.size(); ++i) EXPECT_NEAR(r[i], roots[i], 1e-8 * std::max(1.0, std::abs(roots[i])));
}

TEST(RealRoots, RandomSeparatedFactors) {
    Draw draw(17);
    for (int rep = 0; rep < 500; ++rep) {
        const int n = draw.integer(1, 8);
        std::vector<double> roots;
        while (static_cast<int>(roots.size()) < n) {
            const double x = draw.uniform(-5, 5);
            const bool separated =
                std::all_of(roots.begin(), roots.end(), [&](double y) { return std::abs(x - y) >= 1e-1; });
            if (separated) roots.push_back(x);
        }
        std::sort(roots.begin(), roots.end());
        const auto r = real_roots(oracle::poly_from_roots(roots, draw.uniform(0.5, 2.0)));
        ASSERT_EQ(r.size(), roots.size()) << "rep " << rep;
        for (std::size_t i = 0; i < roots.size(); ++i) ASSERT_NEAR(r[i], roots[i], 1e-7) << "rep " << rep;
    }
}

TEST(RealRoots, RejectsZeroPolynomial) {
    const std::vector<double> c{0, 0, 0};
    EXPECT_THROW(real_roots(c), ParameterError);
}

TEST(Poly, EvalAndMul) {
    const std::vector<double> a{1, 2};      // 1 + 2x
    const std::vector<double> b{-1, 0, 3};  // -1 + 3x^2
    EXPECT_DOUBLE_EQ(poly_eval(a, 2.0), 5.0);
    const auto p = poly_mul(a, b);
    ASSERT_EQ(p.size(), 4U);
    EXPECT_DOUBLE_EQ(poly_eval(p, 1.5), poly_eval(a, 1.5) * poly_eval(b, 1.5));
}
