#pragma once

#include "ofmf/factorization.hpp"
#include "ofmf/forecaster.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ofmf {

/// M x T series matrix (rows are series, columns are time).
///
/// `scale` maps normalized values back to original units (value * scale).
/// When `row_scales` is non-empty it replaces `scale` row by row.
struct SeriesMatrix {
    Matrix values;
    double scale = 1.0;
    std::vector<double> row_scales;

    [[nodiscard]] std::size_t M() const { return static_cast<std::size_t>(values.rows()); }
    [[nodiscard]] std::size_t T() const { return static_cast<std::size_t>(values.cols()); }
    [[nodiscard]] double scale_of(std::size_t row) const {
        return row_scales.empty() ? scale : row_scales[row];
    }
};

enum class Aggregate { None, Mean, Sum };

struct LoadFormat {
    char delimiter = ',';
    char decimal_separator = '.';
    std::size_t header_rows = 0;
    std::size_t index_cols = 0;
    bool rows_are_time = false;     // transpose so that series become rows
    Aggregate aggregate = Aggregate::None;
    std::size_t block = 4;          // raw time steps per aggregated step
    // Windows applied after orientation and aggregation; count 0 = to the end.
    std::size_t row_offset = 0;
    std::size_t row_count = 0;
    std::size_t time_offset = 0;
    std::size_t time_count = 0;
};

/// Reads a dense delimited numeric table. Quoted cells are unquoted, empty
/// trailing cells at line end are ignored. A trailing partial aggregation
/// block is dropped. Throws IngestionError with the 1-based line/column of the
/// first ragged row or unparseable cell, IoError if the file cannot be read.
SeriesMatrix load_matrix(const std::filesystem::path& path, const LoadFormat& format);
SeriesMatrix parse_matrix(const std::string& text, const LoadFormat& format);

enum class NormalizeMode { Global, PerRow };

/// Divides by the largest absolute value (globally or per row) and records it
/// as the scale. Throws DegenerateInputError on an all-zero matrix (or row).
SeriesMatrix normalize(SeriesMatrix matrix, NormalizeMode mode = NormalizeMode::Global);
SeriesMatrix denormalize(SeriesMatrix matrix);

/// Writes the matrix as comma-separated rows at 17 significant digits.
void write_matrix(const Matrix& values, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Sparsity masks

struct MaskDescriptor {
    std::string kind = "full";  // full | unstructured | structured
    double nnz = 1.0;
    bool exact_per_column = false;
    double arrival = 0.0;
    double departure = 1.0;
    std::uint64_t seed = 0;
};

/// M x T observation pattern, stored column-major so a time step is contiguous.
class SparsityMask {
public:
    SparsityMask() = default;
    SparsityMask(std::size_t M, std::size_t T, MaskDescriptor descriptor);

    [[nodiscard]] bool observed(std::size_t row, std::size_t t) const { return bits_[t * M_ + row] != 0; }
    void set(std::size_t row, std::size_t t, bool value) { bits_[t * M_ + row] = value ? 1 : 0; }

    [[nodiscard]] std::size_t M() const { return M_; }
    [[nodiscard]] std::size_t T() const { return T_; }
    [[nodiscard]] const MaskDescriptor& descriptor() const { return descriptor_; }
    [[nodiscard]] double observed_fraction() const;
    [[nodiscard]] std::size_t column_count(std::size_t t) const;

private:
    std::size_t M_ = 0;
    std::size_t T_ = 0;
    MaskDescriptor descriptor_;
    std::vector<std::uint8_t> bits_;
};

SparsityMask full_mask(std::size_t M, std::size_t T);

/// Each entry observed independently with probability nnz_fraction, or, with
/// exact_per_column, exactly round(nnz_fraction * M) entries per column.
SparsityMask gen_unstructured_mask(std::size_t M, std::size_t T, double nnz_fraction, std::uint64_t seed,
                                   bool exact_per_column = false);

/// Per-row on/off chain starting observed: observed -> missing with
/// probability `arrival`, missing -> observed with probability `departure`.
SparsityMask gen_structured_mask(std::size_t M, std::size_t T, double arrival, double departure,
                                 std::uint64_t seed);

SparsityMask make_mask(std::size_t M, std::size_t T, const MaskDescriptor& descriptor);

/// Slice of column t-1 (t is 1-based) restricted to the mask.
ObservationSlice make_slice(const SeriesMatrix& series, const SparsityMask& mask, std::size_t t);

void write_mask(const SparsityMask& mask, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Synthetic data from the state-space model
//   U_t = U_{t-1} + eta_U,  v_t = sum_l theta_l v_{t-l} + eta_v,  x_t = U_t^T v_t + eta_x
// with uniform (bounded) noise.

struct NoiseScales {
    double factor = 0.0;       // eta_U ~ U[-factor, factor)
    double latent = 0.0;       // eta_v
    double observation = 0.0;  // eta_x
};

struct SyntheticSpec {
    std::size_t M = 50;
    int d = 3;
    std::vector<double> theta{0.5, 0.3};
    NoiseScales noise{0.01, 1.0, 0.01};
    std::size_t T = 5000;
    std::uint64_t seed = 1;
    // Series i is scaled by 10^(-magnitude_spread * u_i), u_i uniform on [0, 1).
    double magnitude_spread = 0.0;
};

struct SyntheticData {
    SeriesMatrix series;  // normalized so max |x| = 1
    Matrix latent;        // d x T, in generator units
    Matrix U_final;       // d x M
};

/// U_0 entries uniform on [0, 1); the P initial lags all equal one draw of
/// v_0 uniform on [-1, 1). Throws NonStationaryError when |v| exceeds 1e6.
SyntheticData gen_synthetic(const SyntheticSpec& spec);

// ---------------------------------------------------------------------------
// Result persistence

/// Compact per-step record kept for the output table.
struct StepRecord {
    std::size_t replicate = 0;
    std::size_t t = 0;
    std::size_t n_observed = 0;
    double abs_error_sum = 0.0;  // normalized units, unless the writer chose otherwise
    double checksum = 0.0;       // sum of the full forecast vector

    friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

StepRecord summarize(const ForecastRecord& record, std::size_t replicate = 0);

struct ResultTable {
    std::vector<StepRecord> records;
    nlohmann::json metadata = nlohmann::json::object();
};

/// Writes `path` (CSV: replicate,t,n_observed,abs_error_sum,checksum, reals
/// at 17 significant digits) and `path` + ".meta.json".
void write_results(const ResultTable& table, const std::filesystem::path& path);
ResultTable read_results(const std::filesystem::path& path);

std::filesystem::path metadata_path(const std::filesystem::path& path);

/// Exactly round-tripping decimal form (17 significant digits).
std::string format_real(double value);

/// FNV-1a hash over the matrix shape and raw values, as hex.
std::string fingerprint(const Matrix& values);

}  // namespace ofmf
