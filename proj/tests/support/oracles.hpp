#pragma once

#include "ofmf/linalg.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace ofmf::testing {

/// Deterministic draws for test instances.
class Draw {
public:
    explicit Draw(std::uint64_t seed) : engine_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

    Matrix matrix(Eigen::Index rows, Eigen::Index cols, double lo = -1.0, double hi = 1.0);
    Vector vector(Eigen::Index n, double lo = -1.0, double hi = 1.0);
    Matrix gaussian(Eigen::Index rows, Eigen::Index cols);
    /// M^T M + I for a Gaussian n x n M.
    Matrix spd(Eigen::Index n);

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

/// Determinant by cofactor expansion along the first row.
double cofactor_det(const Matrix& A);

/// adj(A) / det(A), entry by entry from cofactors.
Matrix adjugate_inverse(const Matrix& A);

/// Monic polynomial with the given real roots, ascending powers, scaled by `lead`.
std::vector<double> poly_from_roots(const std::vector<double>& roots, double lead = 1.0);

struct QcqpSolution {
    Vector v;
    double objective = 0.0;  // ||v - v_bar||^2
    double multiplier = 0.0;
};

/// min ||v - v_bar||^2  s.t.  ||x - U^T v||^2 <= eps, by a log-barrier
/// interior-point method with damped Newton steps. The start point is the
/// least-squares fit (plus a small move towards v_bar), which must be strictly
/// feasible.
QcqpSolution qcqp_barrier(const Matrix& U, const Vector& x, const Vector& v_bar, double eps);

/// min ||v - v_bar||^2 s.t. residual <= eps by projected gradient in the scalar
/// case d = 1, where the feasible set is an interval.
double scalar_projected_gradient(double u_dot_x, double u_sq, double x_sq, double v_bar, double eps);

/// Smallest achievable ||x - U^T v||^2.
double min_residual(const Matrix& U, const Vector& x);

/// Ordinary least squares on the stacked regression sum_t ||P_t theta - v_t||^2,
/// by Householder QR.
Vector ols_stacked(const std::vector<Matrix>& patches, const std::vector<Vector>& targets);

/// Latent stream v_t = sum_l theta_l v_{t-l} + noise, noise uniform on
/// [-sigma, sigma]; the first P vectors are uniform on [-1, 1]. Returns T
/// vectors.
std::vector<Vector> simulate_ar(const Vector& theta, int d, std::size_t T, double sigma, std::uint64_t seed);

/// Patches and targets for t = P+1..T (1-based) from a simulated stream.
void build_regression(const std::vector<Vector>& stream, std::size_t P, std::vector<Matrix>& patches,
                      std::vector<Vector>& targets);

}  // namespace ofmf::testing
