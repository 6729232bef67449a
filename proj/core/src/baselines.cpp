#include "ofmf/baselines.hpp"

#include "ofmf/errors.hpp"

#include <algorithm>
#include <cctype>
#include <string>

namespace ofmf {

namespace {

void check_next(std::size_t last_t, const ObservationSlice& slice, const char* who) {
    if (slice.t != last_t + 1) {
        throw SequencingError(std::string(who) + ": expected slice t=" + std::to_string(last_t + 1) +
                              ", got t=" + std::to_string(slice.t));
    }
}

}  // namespace

BaseState::BaseState(std::size_t M) : last_full(Vector::Zero(static_cast<Eigen::Index>(M))), last_seen_t(M, 0) {}

Vector base_predict(const BaseState& state, std::size_t t) {
    const auto M = state.last_full.size();
    Vector out = Vector::Zero(M);
    if (!state.seen_any) return out;
    for (Eigen::Index i = 0; i < M; ++i) {
        const bool observed_before = t > 1 && state.last_seen_t[static_cast<std::size_t>(i)] == t - 1;
        out(i) = observed_before ? state.last_full(i) : state.last_vector_mean;
    }
    return out;
}

void base_observe(BaseState& state, const ObservationSlice& slice) {
    check_next(state.last_t, slice, "base");
    slice.validate(static_cast<std::size_t>(state.last_full.size()));
    state.last_t = slice.t;
    if (slice.empty()) return;
    for (std::size_t k = 0; k < slice.indices.size(); ++k) {
        state.last_full(static_cast<Eigen::Index>(slice.indices[k])) = slice.values(static_cast<Eigen::Index>(k));
        state.last_seen_t[slice.indices[k]] = slice.t;
    }
    state.last_vector_mean = slice.values.mean();
    state.seen_any = true;
}

ArFillState::ArFillState(std::size_t M_, std::size_t P_, double r0, FillMode fill_)
    : M(M_), P(P_), fill(fill_), history(P_), ar(lmmse_init(P_, r0)) {
    if (M < 1) throw ParameterError("ar_fill: M must be >= 1");
}

Vector ar_fill_step(ArFillState& state, const ObservationSlice& slice) {
    check_next(state.last_t, slice, "ar_fill");
    slice.validate(state.M);
    const std::size_t t = slice.t;
    const auto M = static_cast<Eigen::Index>(state.M);

    Vector x_hat;
    if (t == 1) {
        x_hat = Vector::Zero(M);
    } else if (t <= state.P) {
        x_hat = state.history.lag(1);
    } else {
        x_hat = predict_latent(state.ar.theta, state.history, t, state.P);
    }

    Vector completed = state.fill == FillMode::Predict ? x_hat : Vector(Vector::Zero(M));
    for (std::size_t k = 0; k < slice.indices.size(); ++k) {
        completed(static_cast<Eigen::Index>(slice.indices[k])) = slice.values(static_cast<Eigen::Index>(k));
    }
    if (t > state.P && !slice.empty()) {
        const Matrix patch = make_patch(state.history, t, state.P);
        state.ar = lmmse_update(std::move(state.ar), patch, completed);
        state.ar.theta = lmmse_solve(state.ar);
    }
    state.history.push(t, std::move(completed));
    state.last_t = t;
    return x_hat;
}

PmfState pmf_init(std::size_t M, int d, const FpParams& params, std::uint64_t seed, PmfPrior prior) {
    ForecasterConfig cfg;
    cfg.method = Method::FP;
    cfg.d = d;
    cfg.P = 1;
    cfg.rho_u = params.rho_u;
    cfg.rho_v = params.rho_v;
    cfg.max_ite = params.max_ite;
    cfg.seed = seed;
    const ForecasterState start = init_forecaster(cfg, M);
    return PmfState{M, start.U, start.v, params, prior, 0};
}

Vector pmf_online_step(PmfState& state, const ObservationSlice& slice) {
    check_next(state.last_t, slice, "pmf");
    slice.validate(state.M);
    const auto d = state.U.rows();
    const auto M = static_cast<Eigen::Index>(state.M);
    state.last_t = slice.t;

    Priors priors;
    Vector x_hat;
    if (slice.t == 1) {
        priors = Priors{Matrix::Zero(d, M), Vector::Zero(d)};
        x_hat = Vector::Zero(M);
    } else {
        x_hat = state.U.transpose() * state.v;
        priors = Priors{state.U, state.prior == PmfPrior::Previous ? state.v : Vector(Vector::Zero(d))};
    }
    if (slice.empty()) return x_hat;

    Factors factors = fp_step(slice, priors, state.U, state.params);
    state.U = std::move(factors.U);
    state.v = std::move(factors.v);
    return x_hat;
}

ForecasterState naive_mf_init(ForecasterConfig config, std::size_t M) {
    config.method = Method::NAIVE;
    return init_forecaster(config, M);
}

ForecastRecord naive_mf_step(ForecasterState& state, const ObservationSlice& slice) {
    if (state.config.method != Method::NAIVE) {
        throw ParameterError("naive_mf_step: state was not initialized for the naive method");
    }
    return step(state, slice);
}

std::string_view to_string(PredictorKind kind) {
    switch (kind) {
        case PredictorKind::Base: return "BASE";
        case PredictorKind::AR: return "AR";
        case PredictorKind::PMF: return "PMF";
        case PredictorKind::NAIVE: return "NAIVE";
        case PredictorKind::FP: return "FP";
        case PredictorKind::FT: return "FT";
        case PredictorKind::ZT: return "ZT";
    }
    return "?";
}

PredictorKind parse_predictor(std::string_view name) {
    std::string upper;
    for (char c : name) upper.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    if (upper == "BASE") return PredictorKind::Base;
    if (upper == "AR") return PredictorKind::AR;
    if (upper == "PMF") return PredictorKind::PMF;
    switch (parse_method(name)) {
        case Method::FP: return PredictorKind::FP;
        case Method::FT: return PredictorKind::FT;
        case Method::ZT: return PredictorKind::ZT;
        case Method::NAIVE: return PredictorKind::NAIVE;
    }
    throw ParameterError("unknown predictor '" + std::string(name) + "'");
}

namespace {

class BasePredictor final : public Predictor {
public:
    explicit BasePredictor(std::size_t M) : state_(M) {}
    ForecastRecord step(const ObservationSlice& slice) override {
        Vector x_hat = base_predict(state_, slice.t);
        base_observe(state_, slice);
        return make_record(slice, std::move(x_hat));
    }

private:
    BaseState state_;
};

class ArFillPredictor final : public Predictor {
public:
    ArFillPredictor(std::size_t M, const PredictorConfig& cfg)
        : state_(M, static_cast<std::size_t>(cfg.model.P), cfg.model.r0, cfg.fill) {}
    ForecastRecord step(const ObservationSlice& slice) override {
        return make_record(slice, ar_fill_step(state_, slice));
    }

private:
    ArFillState state_;
};

class PmfPredictor final : public Predictor {
public:
    PmfPredictor(std::size_t M, const PredictorConfig& cfg)
        : state_(pmf_init(M, cfg.model.d, FpParams{cfg.model.rho_u, cfg.model.rho_v, cfg.model.max_ite},
                          cfg.model.seed, cfg.pmf_prior)) {}
    ForecastRecord step(const ObservationSlice& slice) override {
        return make_record(slice, pmf_online_step(state_, slice));
    }

private:
    PmfState state_;
};

class ForecasterPredictor final : public Predictor {
public:
    ForecasterPredictor(std::size_t M, const ForecasterConfig& cfg) : state_(init_forecaster(cfg, M)) {}
    ForecastRecord step(const ObservationSlice& slice) override { return ofmf::step(state_, slice); }

private:
    ForecasterState state_;
};

}  // namespace

std::unique_ptr<Predictor> make_predictor(const PredictorConfig& config, std::size_t M) {
    ForecasterConfig model = config.model;
    switch (config.kind) {
        case PredictorKind::Base: return std::make_unique<BasePredictor>(M);
        case PredictorKind::AR: return std::make_unique<ArFillPredictor>(M, config);
        case PredictorKind::PMF: return std::make_unique<PmfPredictor>(M, config);
        case PredictorKind::NAIVE: model.method = Method::NAIVE; break;
        case PredictorKind::FP: model.method = Method::FP; break;
        case PredictorKind::FT: model.method = Method::FT; break;
        case PredictorKind::ZT: model.method = Method::ZT; break;
    }
    return std::make_unique<ForecasterPredictor>(M, model);
}

}  // namespace ofmf
