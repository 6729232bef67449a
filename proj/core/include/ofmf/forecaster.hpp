#pragma once

#include "ofmf/ar_lmmse.hpp"
#include "ofmf/factorization.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace ofmf {

/// E-step used by the forecaster.
enum class Method { FP, FT, ZT, NAIVE };

std::string_view to_string(Method method);

/// Accepts FP, FT, ZT, NAIVE (any case, optional "-MF" suffix) and the alias
/// LN / LN-MF for ZT. Throws ParameterError otherwise.
Method parse_method(std::string_view name);

struct ForecasterConfig {
    Method method = Method::FP;
    int d = 5;
    int P = 24;
    double r0 = 1.0;
    double rho_u = 1.0;   // FP and NAIVE
    double eps = 5e-2;    // FT
    double rho_v = 1e-4;
    int max_ite = 15;
    std::uint64_t seed = 1;
    bool zt_v_prior = false;

    void validate() const;
};

/// One step's output. Errors are taken over the observed entries only.
struct ForecastRecord {
    std::size_t t = 0;
    Vector x_hat;  // all M dimensions, normalized units
    std::vector<std::size_t> observed_indices;
    double abs_error_sum = 0.0;
    std::size_t n_observed = 0;
};

/// Builds the record for forecast `x_hat` against the observed part of `slice`.
ForecastRecord make_record(const ObservationSlice& slice, Vector x_hat);

struct ForecasterState {
    ForecasterConfig config;
    std::size_t M = 0;
    Matrix U;              // U_{t-1} between steps
    Vector v;              // v_{t-1} between steps
    LatentHistory history;
    ARState ar;
    std::size_t last_t = 0;
    std::size_t m_steps = 0;  // number of AR updates run so far
};

/// Random start: U and v entries uniform on [0, 1/sqrt(d)); the history is
/// seeded with v at time 0. Deterministic in config.seed.
ForecasterState init_forecaster(const ForecasterConfig& config, std::size_t M);

/// Priors for time t: zero at t = 1, a lag-1 copy of v while t <= P, the AR
/// combination of the last P latent vectors afterwards. U_bar is U_{t-1}
/// except at t = 1.
Priors priors_for(const ForecasterState& state, std::size_t t);

/// x_hat = U_bar^T v_bar.
Vector forecast(const Priors& priors);

/// One online step: forecast, E-step, then the AR update when t > P.
///
/// Slices must arrive with t = 1, 2, 3, ... (an all-missing column is an
/// empty slice); anything else throws SequencingError. An empty slice skips
/// both the E-step and the AR update and appends v_bar to the history.
ForecastRecord step(ForecasterState& state, const ObservationSlice& slice);

}  // namespace ofmf
