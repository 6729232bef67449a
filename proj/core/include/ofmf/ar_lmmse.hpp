#pragma once

#include "ofmf/linalg.hpp"

#include <cstddef>
#include <deque>
#include <vector>

namespace ofmf {

/// Ring buffer of the most recent latent vectors, each tagged with its time
/// index. Times are contiguous: push() requires t = latest_time() + 1.
class LatentHistory {
public:
    LatentHistory() = default;
    explicit LatentHistory(std::size_t capacity);

    void push(std::size_t t, Vector v);

    /// v_{latest_time() + 1 - lag}; lag = 1 is the newest entry.
    [[nodiscard]] const Vector& lag(std::size_t lag) const;

    [[nodiscard]] std::size_t size() const { return entries_.size(); }
    [[nodiscard]] std::size_t capacity() const { return capacity_; }
    [[nodiscard]] bool empty() const { return entries_.empty(); }
    [[nodiscard]] std::size_t latest_time() const;

private:
    struct Entry {
        std::size_t t;
        Vector v;
    };
    std::size_t capacity_ = 1;
    std::deque<Entry> entries_;
};

/// Accumulators of the recursive LMMSE estimator of AR(P) coefficients with
/// prior covariance r0 I and identity noise covariance.
struct ARState {
    Matrix r_l;     // P x P, starts at (1/r0) I
    Vector r_r;     // P, starts at 0
    Vector theta;   // P, current estimate
    double r0 = 1.0;
    std::size_t updates = 0;

    [[nodiscard]] std::size_t order() const { return static_cast<std::size_t>(theta.size()); }
};

/// d x P matrix whose column l-1 is v_{t-l}. `history` must end at t - 1 and
/// hold at least P entries; otherwise throws ParameterError.
Matrix make_patch(const LatentHistory& history, std::size_t t, std::size_t P);

ARState lmmse_init(std::size_t P, double r0);

/// r_l += P_t^T P_t, r_r += P_t^T v_t. Leaves theta untouched.
ARState lmmse_update(ARState state, const Matrix& patch, const Vector& v);

/// theta solving r_l theta = r_r.
Vector lmmse_solve(const ARState& state);

/// Batch estimator on the stacked system: least squares on
/// [P; r0^{-1/2} I] theta = [p; 0], solved by column-pivoted QR.
Vector lmmse_batch(const std::vector<Matrix>& patches, const std::vector<Vector>& targets, double r0);

/// sum_l theta_l v_{t-l}.
Vector predict_latent(const Vector& theta, const LatentHistory& history, std::size_t t,
                      std::size_t P);

}  // namespace ofmf
