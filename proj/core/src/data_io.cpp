#include "ofmf/data_io.hpp"

#include "ofmf/errors.hpp"
#include "ofmf/random.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <deque>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string_view>

namespace ofmf {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

std::vector<std::string_view> split(std::string_view line, char delimiter) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(delimiter, start);
        if (pos == std::string_view::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    if (cells.size() > 1 && trim(cells.back()).empty()) cells.pop_back();
    return cells;
}

std::string location(std::size_t line, std::size_t column) {
    return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

double parse_cell(std::string_view cell, char decimal_separator, std::size_t line, std::size_t column) {
    std::string buffer(trim(cell));
    if (decimal_separator != '.') std::replace(buffer.begin(), buffer.end(), decimal_separator, '.');
    if (!buffer.empty() && buffer.front() == '+') buffer.erase(0, 1);
    double value = 0.0;
    const char* first = buffer.data();
    const char* last = buffer.data() + buffer.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (buffer.empty() || ec != std::errc() || ptr != last || !std::isfinite(value)) {
        throw IngestionError(location(line, column) + ": cannot parse '" + std::string(cell) + "'");
    }
    return value;
}

// Accumulates raw time steps into fixed-size blocks.
class TimeAggregator {
public:
    TimeAggregator(Aggregate mode, std::size_t block) : mode_(mode), block_(mode == Aggregate::None ? 1 : block) {
        if (block_ < 1) throw ParameterError("load_matrix: aggregation block must be >= 1");
    }

    // Feeds one raw time step (all series); returns true when a block completed.
    bool feed(const std::vector<double>& column) {
        if (sum_.empty()) sum_.assign(column.size(), 0.0);
        for (std::size_t i = 0; i < column.size(); ++i) sum_[i] += column[i];
        if (++filled_ < block_) return false;
        const double divisor = mode_ == Aggregate::Mean ? static_cast<double>(block_) : 1.0;
        for (double& s : sum_) s /= divisor;
        done_.push_back(std::move(sum_));
        sum_.clear();
        filled_ = 0;
        return true;
    }

    std::vector<std::vector<double>>& columns() { return done_; }

private:
    Aggregate mode_;
    std::size_t block_;
    std::size_t filled_ = 0;
    std::vector<double> sum_;
    std::vector<std::vector<double>> done_;
};

SeriesMatrix parse_stream(std::istream& in, const LoadFormat& format) {
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    std::vector<std::vector<double>> series_rows;  // when rows are series
    TimeAggregator time_rows(format.aggregate, format.block);

    std::vector<double> parsed;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no <= format.header_rows) continue;
        if (trim(line).empty()) continue;
        const auto cells = split(line, format.delimiter);
        if (cells.size() <= format.index_cols) {
            throw IngestionError(location(line_no, cells.size()) + ": row has no numeric cells");
        }
        const std::size_t n = cells.size() - format.index_cols;
        if (width == 0) {
            width = n;
        } else if (n != width) {
            throw IngestionError(location(line_no, cells.size()) + ": ragged row, expected " +
                                 std::to_string(width) + " values, found " + std::to_string(n));
        }
        parsed.resize(n);
        for (std::size_t c = 0; c < n; ++c) {
            parsed[c] = parse_cell(cells[c + format.index_cols], format.decimal_separator, line_no,
                                   c + format.index_cols + 1);
        }
        if (format.rows_are_time) {
            time_rows.feed(parsed);
        } else {
            series_rows.push_back(parsed);
        }
    }
    if (width == 0) throw IngestionError("input table has no data rows");

    Matrix values;
    if (format.rows_are_time) {
        auto& columns = time_rows.columns();
        values.resize(static_cast<Eigen::Index>(width), static_cast<Eigen::Index>(columns.size()));
        for (std::size_t t = 0; t < columns.size(); ++t)
            for (std::size_t i = 0; i < width; ++i) values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = columns[t][i];
    } else {
        const std::size_t block = format.aggregate == Aggregate::None ? 1 : format.block;
        if (block < 1) throw ParameterError("load_matrix: aggregation block must be >= 1");
        const std::size_t T = width / block;
        values.resize(static_cast<Eigen::Index>(series_rows.size()), static_cast<Eigen::Index>(T));
        for (std::size_t i = 0; i < series_rows.size(); ++i) {
            for (std::size_t t = 0; t < T; ++t) {
                double acc = 0.0;
                for (std::size_t k = 0; k < block; ++k) acc += series_rows[i][t * block + k];
                if (format.aggregate == Aggregate::Mean) acc /= static_cast<double>(block);
                values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = acc;
            }
        }
    }

    const auto rows = static_cast<std::size_t>(values.rows());
    const auto cols = static_cast<std::size_t>(values.cols());
    if (format.row_offset >= rows || format.time_offset >= cols) {
        throw IngestionError("requested row/time window starts beyond the table");
    }
    const std::size_t row_count =
        format.row_count == 0 ? rows - format.row_offset : std::min(format.row_count, rows - format.row_offset);
    const std::size_t time_count = format.time_count == 0 ? cols - format.time_offset
                                                          : std::min(format.time_count, cols - format.time_offset);
    SeriesMatrix out;
    out.values = values.block(static_cast<Eigen::Index>(format.row_offset), static_cast<Eigen::Index>(format.time_offset),
                              static_cast<Eigen::Index>(row_count), static_cast<Eigen::Index>(time_count));
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace

SeriesMatrix load_matrix(const std::filesystem::path& path, const LoadFormat& format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    try {
        return parse_stream(in, format);
    } catch (const IngestionError& e) {
        throw IngestionError(path.string() + ": " + e.what());
    }
}

SeriesMatrix parse_matrix(const std::string& text, const LoadFormat& format) {
    std::istringstream in(text);
    return parse_stream(in, format);
}

SeriesMatrix normalize(SeriesMatrix matrix, NormalizeMode mode) {
    if (matrix.values.size() == 0) throw DegenerateInputError("normalize: empty matrix");
    const double peak = matrix.values.cwiseAbs().maxCoeff();
    if (!(peak > 0.0)) throw DegenerateInputError("normalize: matrix is identically zero");
    if (mode == NormalizeMode::Global) {
        matrix.values /= peak;
        matrix.scale *= peak;
        return matrix;
    }
    matrix.row_scales.assign(matrix.M(), matrix.scale);
    for (Eigen::Index i = 0; i < matrix.values.rows(); ++i) {
        const double row_peak = matrix.values.row(i).cwiseAbs().maxCoeff();
        if (row_peak > 0.0) {
            matrix.values.row(i) /= row_peak;
            matrix.row_scales[static_cast<std::size_t>(i)] *= row_peak;
        }
    }
    return matrix;
}

SeriesMatrix denormalize(SeriesMatrix matrix) {
    if (matrix.row_scales.empty()) {
        matrix.values *= matrix.scale;
    } else {
        for (Eigen::Index i = 0; i < matrix.values.rows(); ++i) {
            matrix.values.row(i) *= matrix.row_scales[static_cast<std::size_t>(i)];
        }
        matrix.row_scales.clear();
    }
    matrix.scale = 1.0;
    return matrix;
}

std::string format_real(double value) {
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value, std::chars_format::general, 17);
    return std::string(buffer, result.ptr);
}

void write_matrix(const Matrix& values, const std::filesystem::path& path) {
    std::string text;
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        for (Eigen::Index t = 0; t < values.cols(); ++t) {
            if (t > 0) text.push_back(',');
            text += format_real(values(i, t));
        }
        text.push_back('\n');
    }
    write_text(path, text);
}

// ---------------------------------------------------------------------------

SparsityMask::SparsityMask(std::size_t M, std::size_t T, MaskDescriptor descriptor)
    : M_(M), T_(T), descriptor_(std::move(descriptor)), bits_(M * T, 0) {}

double SparsityMask::observed_fraction() const {
    if (bits_.empty()) return 0.0;
    const auto count = std::accumulate(bits_.begin(), bits_.end(), std::size_t{0});
    return static_cast<double>(count) / static_cast<double>(bits_.size());
}

std::size_t SparsityMask::column_count(std::size_t t) const {
    const auto first = bits_.begin() + static_cast<std::ptrdiff_t>(t * M_);
    return std::accumulate(first, first + static_cast<std::ptrdiff_t>(M_), std::size_t{0});
}

SparsityMask full_mask(std::size_t M, std::size_t T) {
    SparsityMask mask(M, T, MaskDescriptor{});
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t i = 0; i < M; ++i) mask.set(i, t, true);
    return mask;
}

SparsityMask gen_unstructured_mask(std::size_t M, std::size_t T, double nnz_fraction, std::uint64_t seed,
                                   bool exact_per_column) {
    if (!(nnz_fraction > 0.0 && nnz_fraction <= 1.0)) {
        throw ParameterError("unstructured mask: nnz fraction must be in (0, 1]");
    }
    MaskDescriptor desc;
    desc.kind = "unstructured";
    desc.nnz = nnz_fraction;
    desc.exact_per_column = exact_per_column;
    desc.seed = seed;
    SparsityMask mask(M, T, desc);
    Rng rng(seed);
    if (!exact_per_column) {
        for (std::size_t t = 0; t < T; ++t)
            for (std::size_t i = 0; i < M; ++i) mask.set(i, t, rng.bernoulli(nnz_fraction));
        return mask;
    }
    const auto keep = static_cast<std::size_t>(std::llround(nnz_fraction * static_cast<double>(M)));
    std::vector<std::size_t> order(M);
    for (std::size_t t = 0; t < T; ++t) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        for (std::size_t k = 0; k < keep; ++k) {
            const std::size_t j = k + static_cast<std::size_t>(rng.uniform() * static_cast<double>(M - k));
            std::swap(order[k], order[std::min(j, M - 1)]);
            mask.set(order[k], t, true);
        }
    }
    return mask;
}

SparsityMask gen_structured_mask(std::size_t M, std::size_t T, double arrival, double departure,
                                 std::uint64_t seed) {
    if (!(arrival > 0.0 && arrival < 1.0) || !(departure > 0.0 && departure <= 1.0)) {
        throw ParameterError("structured mask: arrival must be in (0, 1) and departure in (0, 1]");
    }
    MaskDescriptor desc;
    desc.kind = "structured";
    desc.arrival = arrival;
    desc.departure = departure;
    desc.seed = seed;
    SparsityMask mask(M, T, desc);
    for (std::size_t i = 0; i < M; ++i) {
        Rng rng(mix_seed(seed, i));
        bool observed = true;
        for (std::size_t t = 0; t < T; ++t) {
            if (t > 0) observed = observed ? !rng.bernoulli(arrival) : rng.bernoulli(departure);
            mask.set(i, t, observed);
        }
    }
    return mask;
}

SparsityMask make_mask(std::size_t M, std::size_t T, const MaskDescriptor& descriptor) {
    if (descriptor.kind == "full") return full_mask(M, T);
    if (descriptor.kind == "unstructured") {
        return gen_unstructured_mask(M, T, descriptor.nnz, descriptor.seed, descriptor.exact_per_column);
    }
    if (descriptor.kind == "structured") {
        return gen_structured_mask(M, T, descriptor.arrival, descriptor.departure, descriptor.seed);
    }
    throw ParameterError("unknown mask kind '" + descriptor.kind + "'");
}

ObservationSlice make_slice(const SeriesMatrix& series, const SparsityMask& mask, std::size_t t) {
    if (t < 1 || t > series.T() || mask.M() != series.M() || mask.T() < series.T()) {
        throw ParameterError("make_slice: time index or mask shape out of range");
    }
    ObservationSlice slice;
    slice.t = t;
    const auto col = static_cast<Eigen::Index>(t - 1);
    for (std::size_t i = 0; i < series.M(); ++i) {
        if (mask.observed(i, t - 1)) slice.indices.push_back(i);
    }
    slice.values.resize(static_cast<Eigen::Index>(slice.indices.size()));
    for (std::size_t k = 0; k < slice.indices.size(); ++k) {
        slice.values(static_cast<Eigen::Index>(k)) = series.values(static_cast<Eigen::Index>(slice.indices[k]), col);
    }
    return slice;
}

void write_mask(const SparsityMask& mask, const std::filesystem::path& path) {
    std::string text;
    text.reserve(mask.M() * mask.T() * 2);
    for (std::size_t i = 0; i < mask.M(); ++i) {
        for (std::size_t t = 0; t < mask.T(); ++t) {
            if (t > 0) text.push_back(',');
            text.push_back(mask.observed(i, t) ? '1' : '0');
        }
        text.push_back('\n');
    }
    write_text(path, text);
}

// ---------------------------------------------------------------------------

SyntheticData gen_synthetic(const SyntheticSpec& spec) {
    if (spec.M < 1 || spec.d < 1 || spec.T < 1 || spec.theta.empty()) {
        throw ParameterError("gen_synthetic: M, d, T and the AR order must be positive");
    }
    if (spec.magnitude_spread < 0.0) throw ParameterError("gen_synthetic: magnitude_spread must be nonnegative");
    if (spec.noise.factor < 0.0 || spec.noise.latent < 0.0 || spec.noise.observation < 0.0) {
        throw ParameterError("gen_synthetic: noise scales must be nonnegative");
    }
    const auto d = static_cast<Eigen::Index>(spec.d);
    const auto M = static_cast<Eigen::Index>(spec.M);
    const std::size_t P = spec.theta.size();
    Rng rng(spec.seed);

    Matrix U(d, M);
    for (Eigen::Index i = 0; i < M; ++i)
        for (Eigen::Index k = 0; k < d; ++k) U(k, i) = rng.uniform();
    Vector v0(d);
    for (Eigen::Index k = 0; k < d; ++k) v0(k) = rng.symmetric(1.0);
    std::deque<Vector> lags(P, v0);  // lags[0] = v_{t-1}

    SyntheticData out;
    out.latent.resize(d, static_cast<Eigen::Index>(spec.T));
    Matrix X(M, static_cast<Eigen::Index>(spec.T));
    for (std::size_t t = 0; t < spec.T; ++t) {
        if (spec.noise.factor > 0.0) {
            for (Eigen::Index i = 0; i < M; ++i)
                for (Eigen::Index k = 0; k < d; ++k) U(k, i) += rng.symmetric(spec.noise.factor);
        }
        Vector v = Vector::Zero(d);
        for (std::size_t l = 0; l < P; ++l) v += spec.theta[l] * lags[l];
        if (spec.noise.latent > 0.0) {
            for (Eigen::Index k = 0; k < d; ++k) v(k) += rng.symmetric(spec.noise.latent);
        }
        if (!v.allFinite() || v.cwiseAbs().maxCoeff() > 1e6) {
            throw NonStationaryError("gen_synthetic: latent trajectory diverged at t=" + std::to_string(t + 1));
        }
        Vector x = U.transpose() * v;
        if (spec.noise.observation > 0.0) {
            for (Eigen::Index i = 0; i < M; ++i) x(i) += rng.symmetric(spec.noise.observation);
        }
        X.col(static_cast<Eigen::Index>(t)) = x;
        out.latent.col(static_cast<Eigen::Index>(t)) = v;
        lags.pop_back();
        lags.push_front(std::move(v));
    }
    if (spec.magnitude_spread > 0.0) {
        // Scaling row i of X is the same as scaling column i of U and its noise.
        Rng mag(mix_seed(spec.seed, 2));
        for (Eigen::Index i = 0; i < M; ++i) {
            const double m = std::pow(10.0, -spec.magnitude_spread * mag.uniform());
            X.row(i) *= m;
            U.col(i) *= m;
        }
    }
    out.U_final = U;
    out.series = normalize(SeriesMatrix{std::move(X), 1.0, {}});
    return out;
}

// ---------------------------------------------------------------------------

StepRecord summarize(const ForecastRecord& record, std::size_t replicate) {
    return StepRecord{replicate, record.t, record.n_observed, record.abs_error_sum, record.x_hat.sum()};
}

std::filesystem::path metadata_path(const std::filesystem::path& path) {
    return std::filesystem::path(path.string() + ".meta.json");
}

void write_results(const ResultTable& table, const std::filesystem::path& path) {
    std::string text = "replicate,t,n_observed,abs_error_sum,checksum\n";
    for (const StepRecord& r : table.records) {
        text += std::to_string(r.replicate);
        text.push_back(',');
        text += std::to_string(r.t);
        text.push_back(',');
        text += std::to_string(r.n_observed);
        text.push_back(',');
        text += format_real(r.abs_error_sum);
        text.push_back(',');
        text += format_real(r.checksum);
        text.push_back('\n');
    }
    write_text(path, text);
    write_text(metadata_path(path), table.metadata.dump(2) + "\n");
}

ResultTable read_results(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    ResultTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 || trim(line).empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() != 5) {
            throw IngestionError(path.string() + ": " + location(line_no, cells.size()) + ": expected 5 fields");
        }
        StepRecord r;
        r.replicate = static_cast<std::size_t>(parse_cell(cells[0], '.', line_no, 1));
        r.t = static_cast<std::size_t>(parse_cell(cells[1], '.', line_no, 2));
        r.n_observed = static_cast<std::size_t>(parse_cell(cells[2], '.', line_no, 3));
        r.abs_error_sum = parse_cell(cells[3], '.', line_no, 4);
        r.checksum = parse_cell(cells[4], '.', line_no, 5);
        table.records.push_back(r);
    }
    std::ifstream meta(metadata_path(path), std::ios::binary);
    if (!meta) throw IoError("cannot open '" + metadata_path(path).string() + "' for reading");
    try {
        meta >> table.metadata;
    } catch (const nlohmann::json::exception& e) {
        throw IngestionError(metadata_path(path).string() + ": " + e.what());
    }
    return table;
}

std::string fingerprint(const Matrix& values) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    auto mix = [&hash](const void* data, std::size_t n) {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t k = 0; k < n; ++k) {
            hash ^= bytes[k];
            hash *= 0x100000001b3ULL;
        }
    };
    const std::int64_t shape[2] = {values.rows(), values.cols()};
    mix(shape, sizeof(shape));
    mix(values.data(), static_cast<std::size_t>(values.size()) * sizeof(double));
    char buffer[17];
    std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(hash));
    return buffer;
}

}  // namespace ofmf
