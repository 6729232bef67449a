#include "ofmf/forecaster.hpp"

#include "ofmf/errors.hpp"
#include "ofmf/random.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

namespace ofmf {

std::string_view to_string(Method method) {
    switch (method) {
        case Method::FP: return "FP";
        case Method::FT: return "FT";
        case Method::ZT: return "ZT";
        case Method::NAIVE: return "NAIVE";
    }
    return "?";
}

Method parse_method(std::string_view name) {
    std::string upper;
    for (char c : name) upper.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    if (upper.size() > 3 && upper.ends_with("-MF")) upper.resize(upper.size() - 3);
    if (upper == "FP") return Method::FP;
    if (upper == "FT") return Method::FT;
    if (upper == "ZT" || upper == "LN") return Method::ZT;
    if (upper == "NAIVE") return Method::NAIVE;
    throw ParameterError("unknown factorization method '" + std::string(name) + "'");
}

void ForecasterConfig::validate() const {
    if (d < 1) throw ParameterError("config: d must be >= 1");
    if (P < 1) throw ParameterError("config: P must be >= 1");
    if (max_ite < 1) throw ParameterError("config: max_ite must be >= 1");
    if (!(r0 > 0.0)) throw ParameterError("config: r0 must be positive");
    if (!(rho_v > 0.0)) throw ParameterError("config: rho_v must be positive");
    if ((method == Method::FP || method == Method::NAIVE) && !(rho_u > 0.0)) {
        throw ParameterError("config: rho_u must be positive");
    }
    if (method == Method::FT && !(eps > 0.0)) throw ParameterError("config: eps must be positive");
}

ForecastRecord make_record(const ObservationSlice& slice, Vector x_hat) {
    ForecastRecord record;
    record.t = slice.t;
    record.observed_indices = slice.indices;
    record.n_observed = slice.indices.size();
    for (std::size_t k = 0; k < slice.indices.size(); ++k) {
        record.abs_error_sum += std::abs(x_hat(static_cast<Eigen::Index>(slice.indices[k])) -
                                         slice.values(static_cast<Eigen::Index>(k)));
    }
    record.x_hat = std::move(x_hat);
    return record;
}

ForecasterState init_forecaster(const ForecasterConfig& config, std::size_t M) {
    config.validate();
    if (M < 1) throw ParameterError("init_forecaster: M must be >= 1");
    const auto d = static_cast<Eigen::Index>(config.d);
    const double scale = 1.0 / std::sqrt(static_cast<double>(config.d));

    Rng rng(config.seed);
    ForecasterState state;
    state.config = config;
    state.M = M;
    state.U.resize(d, static_cast<Eigen::Index>(M));
    for (Eigen::Index i = 0; i < state.U.cols(); ++i)
        for (Eigen::Index k = 0; k < d; ++k) state.U(k, i) = scale * rng.uniform();
    state.v.resize(d);
    for (Eigen::Index k = 0; k < d; ++k) state.v(k) = scale * rng.uniform();
    state.history = LatentHistory(static_cast<std::size_t>(config.P));
    state.history.push(0, state.v);
    state.ar = lmmse_init(static_cast<std::size_t>(config.P), config.r0);
    return state;
}

Priors priors_for(const ForecasterState& state, std::size_t t) {
    if (t < 1) throw ParameterError("priors_for: t must be >= 1");
    const auto d = static_cast<Eigen::Index>(state.config.d);
    const auto P = static_cast<std::size_t>(state.config.P);
    if (t == 1) return Priors{Matrix::Zero(d, static_cast<Eigen::Index>(state.M)), Vector::Zero(d)};
    if (t <= P) return Priors{state.U, state.history.lag(1)};
    return Priors{state.U, predict_latent(state.ar.theta, state.history, t, P)};
}

Vector forecast(const Priors& priors) { return priors.U_bar.transpose() * priors.v_bar; }

ForecastRecord step(ForecasterState& state, const ObservationSlice& slice) {
    if (slice.t != state.last_t + 1) {
        throw SequencingError("forecaster: expected slice t=" + std::to_string(state.last_t + 1) +
                              ", got t=" + std::to_string(slice.t));
    }
    slice.validate(state.M);
    const std::size_t t = slice.t;
    const ForecasterConfig& cfg = state.config;

    const Priors priors = priors_for(state, t);
    ForecastRecord record = make_record(slice, forecast(priors));
    state.last_t = t;

    if (slice.empty()) {
        state.v = priors.v_bar;
        state.history.push(t, priors.v_bar);
        return record;
    }

    Factors factors;
    switch (cfg.method) {
        case Method::FP:
            factors = fp_step(slice, priors, state.U, FpParams{cfg.rho_u, cfg.rho_v, cfg.max_ite});
            break;
        case Method::FT:
            factors = ft_step(slice, priors, state.U, FtParams{cfg.eps, cfg.rho_v, cfg.max_ite});
            break;
        case Method::ZT:
            factors = zt_step(slice, priors, state.U, ZtParams{cfg.rho_v, cfg.max_ite, cfg.zt_v_prior});
            break;
        case Method::NAIVE:
            factors = naive_step(slice, state.U, FpParams{cfg.rho_u, cfg.rho_v, cfg.max_ite});
            break;
    }

    const auto P = static_cast<std::size_t>(cfg.P);
    if (t > P) {
        const Matrix patch = make_patch(state.history, t, P);
        state.ar = lmmse_update(std::move(state.ar), patch, factors.v);
        try {
            state.ar.theta = lmmse_solve(state.ar);
        } catch (const SingularMatrixError& e) {
            throw NonStationaryError("step: latent sequence diverged at t=" + std::to_string(t) +
                                     " (|v| = " + std::to_string(factors.v.norm()) + "): " + e.what());
        }
        ++state.m_steps;
    }
    state.U = std::move(factors.U);
    state.v = factors.v;
    state.history.push(t, std::move(factors.v));
    return record;
}

}  // namespace ofmf
