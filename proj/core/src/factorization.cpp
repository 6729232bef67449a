#include "ofmf/factorization.hpp"

#include "ofmf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ofmf {

namespace {

void check_dimensions(const ObservationSlice& slice, const Priors& priors, const Matrix& U_prev) {
    const auto d = priors.U_bar.rows();
    const auto M = priors.U_bar.cols();
    if (d < 1 || M < 1) throw ParameterError("factor step: empty prior matrix");
    if (priors.v_bar.size() != d) throw ParameterError("factor step: v_bar length does not match d");
    if (U_prev.rows() != d || U_prev.cols() != M) {
        throw ParameterError("factor step: U_prev shape does not match U_bar");
    }
    slice.validate(static_cast<std::size_t>(M));
}

void check_positive(double value, const char* name) {
    if (!(value > 0.0)) throw ParameterError(std::string(name) + " must be positive");
}

void check_iterations(int max_ite) {
    if (max_ite < 1) throw ParameterError("max_ite must be at least 1");
}

void scatter_columns(Matrix& U, const Matrix& U_obs, const std::vector<std::size_t>& indices) {
    for (std::size_t k = 0; k < indices.size(); ++k) {
        U.col(static_cast<Eigen::Index>(indices[k])) = U_obs.col(static_cast<Eigen::Index>(k));
    }
}

Factors assemble(const Matrix& U_prev, const Matrix& U_obs, Vector v,
                 const std::vector<std::size_t>& indices, StepDiagnostics diagnostics) {
    Factors out{U_prev, std::move(v), diagnostics};
    scatter_columns(out.U, U_obs, indices);
    return out;
}

// v <- (rho_v I + U U^T)^{-1} (rhs_prior + U x)
Vector ridge_latent(const Matrix& U_obs, const Vector& x, double rho_v, const Vector& rhs_prior) {
    Matrix gram = U_obs * U_obs.transpose();
    gram.diagonal().array() += rho_v;
    return solve_spd(gram, Vector(rhs_prior + U_obs * x));
}

}  // namespace

void ObservationSlice::validate(std::size_t M) const {
    if (t < 1) throw ParameterError("slice: time index must be >= 1");
    if (static_cast<std::size_t>(values.size()) != indices.size()) {
        throw ParameterError("slice: values and indices differ in length");
    }
    for (std::size_t k = 0; k < indices.size(); ++k) {
        if (indices[k] >= M) throw ParameterError("slice: index out of range");
        if (k > 0 && indices[k] <= indices[k - 1]) {
            throw ParameterError("slice: indices must be strictly increasing");
        }
        const double value = values(static_cast<Eigen::Index>(k));
        if (!std::isfinite(value) || std::abs(value) > 1.0 + 1e-12) {
            throw ParameterError("slice: value outside the normalized range [-1, 1]");
        }
    }
}

double FtConstants::prior_residual() const { return std::max(0.0, c3 + c4 - 2.0 * c1); }

Matrix restrict_columns(const Matrix& U, const std::vector<std::size_t>& indices) {
    Matrix out(U.rows(), static_cast<Eigen::Index>(indices.size()));
    for (std::size_t k = 0; k < indices.size(); ++k) {
        out.col(static_cast<Eigen::Index>(k)) = U.col(static_cast<Eigen::Index>(indices[k]));
    }
    return out;
}

double fp_objective(const Matrix& U_obs, const Vector& v, const Vector& x, const Matrix& U_bar_obs,
                    const Vector& v_bar, double rho_u, double rho_v) {
    return (x - U_obs.transpose() * v).squaredNorm() + rho_u * (U_obs - U_bar_obs).squaredNorm() +
           rho_v * (v - v_bar).squaredNorm();
}

Factors fp_step(const ObservationSlice& slice, const Priors& priors, const Matrix& U_prev,
                const FpParams& params) {
    check_positive(params.rho_u, "rho_u");
    check_positive(params.rho_v, "rho_v");
    check_iterations(params.max_ite);
    check_dimensions(slice, priors, U_prev);
    if (slice.empty()) return Factors{U_prev, priors.v_bar, {}};

    const Vector& x = slice.values;
    const Matrix U_bar = restrict_columns(priors.U_bar, slice.indices);
    Matrix U = restrict_columns(U_prev, slice.indices);
    Vector v = priors.v_bar;
    const Vector v_prior_rhs = params.rho_v * priors.v_bar;

    StepDiagnostics diag;
    for (int i = 0; i < params.max_ite; ++i) {
        v = ridge_latent(U, x, params.rho_v, v_prior_rhs);
        U = rank1_reg_solve(params.rho_u, v, params.rho_u * U_bar + v * x.transpose());
        ++diag.iterations;
    }
    return assemble(U_prev, U, std::move(v), slice.indices, diag);
}

Factors fp_step(const ObservationSlice& slice, const Priors& priors, const FpParams& params) {
    return fp_step(slice, priors, priors.U_bar, params);
}

FtConstants ft_constants(const Vector& x, const Matrix& U_bar_obs, const Vector& v) {
    if (U_bar_obs.rows() != v.size() || U_bar_obs.cols() != x.size()) {
        throw ParameterError("ft_constants: dimension mismatch");
    }
    const Vector projected = U_bar_obs.transpose() * v;
    return FtConstants{projected.dot(x), v.squaredNorm(), x.squaredNorm(), projected.squaredNorm()};
}

double ft_lambda_u(const FtConstants& consts, double eps) {
    check_positive(eps, "eps");
    if (!(consts.c2 > 0.0)) throw DegenerateLatentError("ft_lambda_u: ||v||^2 must be positive");
    const double lambda =
        -1.0 / consts.c2 + std::sqrt(consts.prior_residual()) / (std::sqrt(eps) * consts.c2);
    return std::max(0.0, lambda);
}

Matrix ft_u_update(const Matrix& U_bar_obs, const Vector& v, const Vector& x, double lambda) {
    if (lambda == 0.0) return U_bar_obs;
    return rank1_update_solve(1.0, lambda, v, U_bar_obs + lambda * v * x.transpose());
}

Factors ft_step(const ObservationSlice& slice, const Priors& priors, const Matrix& U_prev,
                const FtParams& params) {
    check_positive(params.eps, "eps");
    check_positive(params.rho_v, "rho_v");
    check_iterations(params.max_ite);
    check_dimensions(slice, priors, U_prev);
    if (slice.empty()) return Factors{U_prev, priors.v_bar, {}};

    const Vector& x = slice.values;
    const Matrix U_bar = restrict_columns(priors.U_bar, slice.indices);
    Matrix U = restrict_columns(U_prev, slice.indices);
    Vector v = priors.v_bar;
    const Vector v_prior_rhs = params.rho_v * priors.v_bar;

    StepDiagnostics diag;
    for (int i = 0; i < params.max_ite; ++i) {
        v = ridge_latent(U, x, params.rho_v, v_prior_rhs);
        ++diag.iterations;
        const FtConstants consts = ft_constants(x, U_bar, v);
        if (consts.c2 < kDegenerateLatent) {
            ++diag.skipped_updates;
            diag.last_update_skipped = true;
            continue;
        }
        diag.last_update_skipped = false;
        diag.last_multiplier = ft_lambda_u(consts, params.eps);
        U = ft_u_update(U_bar, v, x, diag.last_multiplier);
    }
    return assemble(U_prev, U, std::move(v), slice.indices, diag);
}

Factors ft_step(const ObservationSlice& slice, const Priors& priors, const FtParams& params) {
    return ft_step(slice, priors, priors.U_bar, params);
}

std::vector<double> ft_v_polynomial(const Vector& psi, const Vector& c1, const Vector& c2,
                                    double x_sq, double eps) {
    const auto d = psi.size();
    // (rho + psi_j)^2 as ascending coefficients.
    auto squared_factor = [&psi](Eigen::Index j) {
        return std::vector<double>{psi(j) * psi(j), 2.0 * psi(j), 1.0};
    };
    auto product_except = [&](Eigen::Index skip) {
        std::vector<double> acc{1.0};
        for (Eigen::Index j = 0; j < d; ++j) {
            if (j != skip) acc = poly_mul(acc, squared_factor(j));
        }
        return acc;
    };

    std::vector<double> total(static_cast<std::size_t>(2 * d + 1), 0.0);
    auto accumulate = [&total](const std::vector<double>& p) {
        for (std::size_t k = 0; k < p.size(); ++k) total[k] += p[k];
    };

    for (Eigen::Index i = 0; i < d; ++i) {
        const double a = c1(i);
        const double b = c2(i);
        // -psi a^2 - 2 rho a^2 + rho^2 (psi b^2 - 2 a b)
        const std::vector<double> numerator{-psi(i) * a * a, -2.0 * a * a, psi(i) * b * b - 2.0 * a * b};
        accumulate(poly_mul(numerator, product_except(i)));
    }
    std::vector<double> full = product_except(-1);
    for (double& c : full) c *= (x_sq - eps);
    accumulate(full);
    return total;
}

FtExactV ft_v_exact(const Matrix& U_obs, const Vector& x, const Vector& v_bar, double eps) {
    if (eps < 0.0) throw ParameterError("ft_v_exact: eps must be nonnegative");
    if (U_obs.rows() != v_bar.size() || U_obs.cols() != x.size()) {
        throw ParameterError("ft_v_exact: dimension mismatch");
    }
    auto residual = [&](const Vector& v) { return (x - U_obs.transpose() * v).squaredNorm(); };
    if (residual(v_bar) <= eps) return FtExactV{v_bar, 0.0, false};

    const SymEig eig = sym_eig(U_obs * U_obs.transpose());
    const Vector c1 = eig.Q.transpose() * (U_obs * x);
    const Vector c2 = eig.Q.transpose() * v_bar;
    const double x_sq = x.squaredNorm();

    auto latent_at = [&](double rho) {
        const Vector w = (c1 + rho * c2).array() / (eig.psi.array() + rho);
        return Vector(eig.Q * w);
    };
    // Residual in the eigenbasis; monotone increasing in rho.
    auto gap_at = [&](double rho) {
        const Vector w = (c1 + rho * c2).array() / (eig.psi.array() + rho);
        return (eig.psi.array() * w.array().square()).sum() - 2.0 * c1.dot(w) + x_sq - eps;
    };
    // Polish a polynomial root on the rational form, which is better conditioned.
    auto polish = [&](double rho) {
        double lo = rho;
        double hi = rho;
        double step = 1e-8;
        for (int k = 0; k < 60 && gap_at(lo) > 0.0; ++k, step *= 2.0) lo = rho / (1.0 + step);
        step = 1e-8;
        for (int k = 0; k < 60 && gap_at(hi) < 0.0; ++k, step *= 2.0) hi = rho * (1.0 + step);
        if (!(gap_at(lo) <= 0.0 && gap_at(hi) >= 0.0)) return rho;
        for (int k = 0; k < 200 && hi - lo > 1e-15 * hi; ++k) {
            const double mid = std::sqrt(lo * hi);
            if (gap_at(mid) < 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return (std::abs(gap_at(lo)) < std::abs(gap_at(hi))) ? lo : hi;
    };

    const std::vector<double> poly = ft_v_polynomial(eig.psi, c1, c2, x_sq, eps);
    std::vector<double> roots;
    try {
        roots = real_roots(poly);
    } catch (const ParameterError&) {
        throw InfeasibleError("ft_v_exact: residual polynomial vanishes identically");
    }

    const double tolerance = eps * (1.0 + 1e-6) + 1e-14;
    double best_distance = std::numeric_limits<double>::infinity();
    FtExactV best;
    for (double root : roots) {
        if (!(root > 0.0)) continue;
        const double rho = polish(root);
        const Vector v = latent_at(rho);
        if (!v.allFinite() || residual(v) > tolerance) continue;
        const double distance = (v - v_bar).squaredNorm();
        if (distance < best_distance) {
            best_distance = distance;
            best = FtExactV{v, 1.0 / rho, true};
        }
    }
    if (!std::isfinite(best_distance)) {
        throw InfeasibleError("ft_v_exact: no feasible latent vector for this tolerance");
    }
    return best;
}

Factors zt_step(const ObservationSlice& slice, const Priors& priors, const Matrix& U_prev,
                const ZtParams& params) {
    check_positive(params.rho_v, "rho_v");
    check_iterations(params.max_ite);
    check_dimensions(slice, priors, U_prev);
    if (slice.empty()) return Factors{U_prev, priors.v_bar, {}};

    const Vector& x = slice.values;
    const Matrix U_bar = restrict_columns(priors.U_bar, slice.indices);
    Matrix U = restrict_columns(U_prev, slice.indices);
    Vector v = priors.v_bar;
    const Vector v_prior_rhs =
        params.v_prior ? Vector(params.rho_v * priors.v_bar) : Vector(Vector::Zero(v.size()));

    StepDiagnostics diag;
    for (int i = 0; i < params.max_ite; ++i) {
        v = ridge_latent(U, x, params.rho_v, v_prior_rhs);
        ++diag.iterations;
        const double norm_sq = v.squaredNorm();
        if (norm_sq < kDegenerateLatent) {
            ++diag.skipped_updates;
            diag.last_update_skipped = true;
            continue;
        }
        diag.last_update_skipped = false;
        const Vector lambda = (U_bar.transpose() * v - x) / norm_sq;
        diag.last_multiplier = lambda.norm();
        U = U_bar - v * lambda.transpose();
    }
    return assemble(U_prev, U, std::move(v), slice.indices, diag);
}

Factors zt_step(const ObservationSlice& slice, const Priors& priors, const ZtParams& params) {
    return zt_step(slice, priors, priors.U_bar, params);
}

Factors naive_step(const ObservationSlice& slice, const Matrix& U_prev, const FpParams& params) {
    const Priors zero{Matrix::Zero(U_prev.rows(), U_prev.cols()), Vector::Zero(U_prev.rows())};
    return fp_step(slice, zero, U_prev, params);
}

}  // namespace ofmf
