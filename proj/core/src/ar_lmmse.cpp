#include "ofmf/ar_lmmse.hpp"

#include "ofmf/errors.hpp"

#include <cmath>
#include <string>

namespace ofmf {

LatentHistory::LatentHistory(std::size_t capacity) : capacity_(capacity < 1 ? 1 : capacity) {}

void LatentHistory::push(std::size_t t, Vector v) {
    if (!entries_.empty() && t != entries_.back().t + 1) {
        throw SequencingError("latent history: expected time " +
                              std::to_string(entries_.back().t + 1) + ", got " + std::to_string(t));
    }
    entries_.push_back(Entry{t, std::move(v)});
    while (entries_.size() > capacity_) entries_.pop_front();
}

const Vector& LatentHistory::lag(std::size_t lag) const {
    if (lag < 1 || lag > entries_.size()) {
        throw ParameterError("latent history: lag " + std::to_string(lag) + " not available");
    }
    return entries_[entries_.size() - lag].v;
}

std::size_t LatentHistory::latest_time() const {
    if (entries_.empty()) throw ParameterError("latent history is empty");
    return entries_.back().t;
}

Matrix make_patch(const LatentHistory& history, std::size_t t, std::size_t P) {
    if (P < 1) throw ParameterError("make_patch: order must be >= 1");
    if (history.size() < P || history.latest_time() + 1 != t || t <= P) {
        throw ParameterError("make_patch: history does not cover v_{t-1}..v_{t-P}");
    }
    const auto d = history.lag(1).size();
    Matrix patch(d, static_cast<Eigen::Index>(P));
    for (std::size_t l = 1; l <= P; ++l) patch.col(static_cast<Eigen::Index>(l - 1)) = history.lag(l);
    return patch;
}

ARState lmmse_init(std::size_t P, double r0) {
    if (P < 1) throw ParameterError("lmmse_init: order must be >= 1");
    if (!(r0 > 0.0)) throw ParameterError("lmmse_init: r0 must be positive");
    const auto n = static_cast<Eigen::Index>(P);
    return ARState{Matrix::Identity(n, n) / r0, Vector::Zero(n), Vector::Zero(n), r0, 0};
}

ARState lmmse_update(ARState state, const Matrix& patch, const Vector& v) {
    if (patch.cols() != state.r_l.rows() || patch.rows() != v.size()) {
        throw ParameterError("lmmse_update: dimension mismatch");
    }
    state.r_l.noalias() += patch.transpose() * patch;
    // Keep r_l bit-symmetric.
    state.r_l = 0.5 * (state.r_l + state.r_l.transpose()).eval();
    state.r_r.noalias() += patch.transpose() * v;
    ++state.updates;
    return state;
}

Vector lmmse_solve(const ARState& state) { return solve_spd(state.r_l, state.r_r); }

Vector lmmse_batch(const std::vector<Matrix>& patches, const std::vector<Vector>& targets, double r0) {
    if (patches.empty() || patches.size() != targets.size()) {
        throw ParameterError("lmmse_batch: need equally many, and at least one, patches and targets");
    }
    if (!(r0 > 0.0)) throw ParameterError("lmmse_batch: r0 must be positive");
    const auto P = patches.front().cols();
    Eigen::Index rows = P;
    for (std::size_t k = 0; k < patches.size(); ++k) {
        if (patches[k].cols() != P || patches[k].rows() != targets[k].size()) {
            throw ParameterError("lmmse_batch: inconsistent dimensions");
        }
        rows += patches[k].rows();
    }
    Matrix stacked(rows, P);
    Vector rhs(rows);
    Eigen::Index offset = 0;
    for (std::size_t k = 0; k < patches.size(); ++k) {
        const auto d = patches[k].rows();
        stacked.middleRows(offset, d) = patches[k];
        rhs.segment(offset, d) = targets[k];
        offset += d;
    }
    stacked.bottomRows(P) = Matrix::Identity(P, P) / std::sqrt(r0);
    rhs.tail(P).setZero();
    return stacked.colPivHouseholderQr().solve(rhs);
}

Vector predict_latent(const Vector& theta, const LatentHistory& history, std::size_t t,
                      std::size_t P) {
    if (static_cast<std::size_t>(theta.size()) != P) {
        throw ParameterError("predict_latent: theta length does not match P");
    }
    if (history.size() < P || history.latest_time() + 1 != t) {
        throw ParameterError("predict_latent: history does not end at t - 1");
    }
    Vector out = Vector::Zero(history.lag(1).size());
    for (std::size_t l = 1; l <= P; ++l) out += theta(static_cast<Eigen::Index>(l - 1)) * history.lag(l);
    return out;
}

}  // namespace ofmf
