#pragma once

#include "ofmf/linalg.hpp"

#include <cstddef>
#include <vector>

namespace ofmf {

/// One timestamp's observed column x_t.
///
/// `t` is 1-based. `indices` are 0-based row indices into the M series,
/// strictly increasing; `values` holds the observation for each index in the
/// same order, in normalized units (|value| <= 1).
struct ObservationSlice {
    std::size_t t = 1;
    std::vector<std::size_t> indices;
    Vector values;

    [[nodiscard]] bool empty() const { return indices.empty(); }

    /// Throws ParameterError if the invariants do not hold for a series of
    /// dimension `M`.
    void validate(std::size_t M) const;
};

/// Temporal priors (U_bar, v_bar) fed to the factorizers.
struct Priors {
    Matrix U_bar;  // d x M
    Vector v_bar;  // d
};

/// Scalars of the fixed-tolerance U-update, all over the observed set only.
struct FtConstants {
    double c1 = 0.0;  // v^T U_bar x
    double c2 = 0.0;  // ||v||^2
    double c3 = 0.0;  // ||x||^2
    double c4 = 0.0;  // ||U_bar^T v||^2

    /// ||x - U_bar^T v||^2, clamped at zero against cancellation.
    [[nodiscard]] double prior_residual() const;
};

struct StepDiagnostics {
    int iterations = 0;
    int skipped_updates = 0;       // degenerate-direction skips, all iterations
    bool last_update_skipped = false;
    double last_multiplier = 0.0;  // lambda* (FT) or ||lambda|| (ZT) at the final iteration
};

/// Output of one E-step: the full d x M factor matrix and the latent vector.
struct Factors {
    Matrix U;
    Vector v;
    StepDiagnostics diagnostics;
};

struct FpParams {
    double rho_u = 1.0;
    double rho_v = 1e-4;
    int max_ite = 15;
};

struct FtParams {
    double eps = 5e-2;
    double rho_v = 1e-4;
    int max_ite = 15;
};

struct ZtParams {
    double rho_v = 1e-4;
    int max_ite = 15;
    bool v_prior = false;  // add rho_v * v_bar to the v-update right-hand side
};

/// ||v||^2 under which the U-update direction counts as degenerate.
inline constexpr double kDegenerateLatent = 1e-12;

/// Columns of `U` listed in `indices`.
Matrix restrict_columns(const Matrix& U, const std::vector<std::size_t>& indices);

/// Fixed-penalty objective restricted to the observed set.
double fp_objective(const Matrix& U_obs, const Vector& v, const Vector& x, const Matrix& U_bar_obs,
                    const Vector& v_bar, double rho_u, double rho_v);

/// Fixed-penalty E-step: max_ite alternations of the ridge v-update followed
/// by the penalized U-update, both centred on the priors.
///
/// `U_prev` is the factor matrix entering the step: it seeds the iteration on
/// the observed columns and supplies the unobserved columns unchanged. The
/// overload without it uses `priors.U_bar`.
Factors fp_step(const ObservationSlice& slice, const Priors& priors, const Matrix& U_prev,
                const FpParams& params);
Factors fp_step(const ObservationSlice& slice, const Priors& priors, const FpParams& params);

FtConstants ft_constants(const Vector& x, const Matrix& U_bar_obs, const Vector& v);

/// Lagrange multiplier of the fixed-tolerance U-update, clamped at zero.
/// Throws DegenerateLatentError when c2 <= 0 and ParameterError when eps <= 0.
double ft_lambda_u(const FtConstants& consts, double eps);

/// U <- (I + lambda v v^T)^{-1} (U_bar + lambda v x^T) on the observed columns.
Matrix ft_u_update(const Matrix& U_bar_obs, const Vector& v, const Vector& x, double lambda);

/// Fixed-tolerance E-step. v gets the ridge update, U the closed-form
/// constrained update that lands exactly on ||x - U^T v||^2 = eps whenever the
/// prior violates the tolerance.
Factors ft_step(const ObservationSlice& slice, const Priors& priors, const Matrix& U_prev,
                const FtParams& params);
Factors ft_step(const ObservationSlice& slice, const Priors& priors, const FtParams& params);

/// Exact solution of min ||v - v_bar||^2 s.t. ||x - U^T v||^2 <= eps for fixed U,
/// through the eigenbasis of U U^T and the degree-2d polynomial in the
/// ridge parameter. Used as a diagnostic; the main loop uses the ridge update.
struct FtExactV {
    Vector v;
    double multiplier = 0.0;  // lambda = 1/rho; zero when v_bar is already feasible
    bool active = false;
};

/// Coefficients (ascending powers of rho) of the residual-equals-eps
/// polynomial, given the eigenvalues psi and rotated constants c1 = Q^T U x,
/// c2 = Q^T v_bar, and ||x||^2.
std::vector<double> ft_v_polynomial(const Vector& psi, const Vector& c1, const Vector& c2,
                                    double x_sq, double eps);

/// Throws InfeasibleError when no positive root yields a feasible v.
FtExactV ft_v_exact(const Matrix& U_obs, const Vector& x, const Vector& v_bar, double eps);

/// Zero-tolerance E-step: ridge v-update then the minimum-change U that
/// interpolates the observed entries exactly.
Factors zt_step(const ObservationSlice& slice, const Priors& priors, const Matrix& U_prev,
                const ZtParams& params);
Factors zt_step(const ObservationSlice& slice, const Priors& priors, const ZtParams& params);

/// Fixed-penalty alternation with both priors replaced by zero. Unobserved
/// columns still come from `U_prev`; an empty slice returns (U_prev, 0).
Factors naive_step(const ObservationSlice& slice, const Matrix& U_prev, const FpParams& params);

}  // namespace ofmf
