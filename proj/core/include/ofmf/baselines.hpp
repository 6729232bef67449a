#pragma once

#include "ofmf/forecaster.hpp"

#include <memory>
#include <string_view>
#include <vector>

namespace ofmf {

// ---------------------------------------------------------------------------
// Base: last observation, or the mean of the last observed vector.

struct BaseState {
    Vector last_full;                      // latest observed value per dimension
    std::vector<std::size_t> last_seen_t;  // 0 = never observed
    double last_vector_mean = 0.0;
    bool seen_any = false;
    std::size_t last_t = 0;

    explicit BaseState(std::size_t M = 0);
};

Vector base_predict(const BaseState& state, std::size_t t);
void base_observe(BaseState& state, const ObservationSlice& slice);

// ---------------------------------------------------------------------------
// AR(P) on the full M-dimensional series, fitted with the LMMSE recursion.

enum class FillMode { Predict, Zero };

struct ArFillState {
    std::size_t M = 0;
    std::size_t P = 1;
    FillMode fill = FillMode::Predict;
    LatentHistory history;  // completed vectors
    ARState ar;
    std::size_t last_t = 0;

    ArFillState(std::size_t M, std::size_t P, double r0, FillMode fill);
};

/// Forecast, then complete the slice (own forecast or zero in the missing
/// entries), append it to the history and update the AR fit when t > P and the
/// slice is non-empty. Returns the forecast.
Vector ar_fill_step(ArFillState& state, const ObservationSlice& slice);

// ---------------------------------------------------------------------------
// Online PMF: the fixed-penalty step with a random-walk prior and no AR model.

enum class PmfPrior { Previous, Zero };

struct PmfState {
    std::size_t M = 0;
    Matrix U;
    Vector v;
    FpParams params;
    PmfPrior prior = PmfPrior::Previous;
    std::size_t last_t = 0;
};

/// Same random start as init_forecaster with the given d and seed.
PmfState pmf_init(std::size_t M, int d, const FpParams& params, std::uint64_t seed,
                  PmfPrior prior = PmfPrior::Previous);

/// x_hat = U_{t-1}^T v_{t-1} (zero at t = 1); then fp_step centred on
/// (U_{t-1}, v_{t-1}). An empty slice leaves the state unchanged.
Vector pmf_online_step(PmfState& state, const ObservationSlice& slice);

// ---------------------------------------------------------------------------
// Uniform stream interface used by the experiment harness.

enum class PredictorKind { Base, AR, PMF, NAIVE, FP, FT, ZT };

std::string_view to_string(PredictorKind kind);
PredictorKind parse_predictor(std::string_view name);

struct PredictorConfig {
    PredictorKind kind = PredictorKind::FP;
    ForecasterConfig model;  // d, P, r0, penalties, seed; method is derived from kind
    FillMode fill = FillMode::Predict;
    PmfPrior pmf_prior = PmfPrior::Previous;
};

class Predictor {
public:
    virtual ~Predictor() = default;
    virtual ForecastRecord step(const ObservationSlice& slice) = 0;
};

std::unique_ptr<Predictor> make_predictor(const PredictorConfig& config, std::size_t M);

/// Naive MF: the forecaster with zero-centred penalties in the E-step and the
/// AR model over its latent vectors.
ForecasterState naive_mf_init(ForecasterConfig config, std::size_t M);
ForecastRecord naive_mf_step(ForecasterState& state, const ObservationSlice& slice);

}  // namespace ofmf
