#include "ofmf/experiment.hpp"

#include "ofmf/errors.hpp"
#include "ofmf/random.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace ofmf {

ForecasterConfig electricity_defaults() {
    ForecasterConfig cfg;
    cfg.d = 5;
    cfg.P = 24;
    cfg.r0 = 1.0;
    cfg.rho_u = 1.0;
    cfg.rho_v = 1e-4;
    cfg.eps = 5e-2;
    cfg.max_ite = 15;
    return cfg;
}

ForecasterConfig traffic_defaults() {
    ForecasterConfig cfg = electricity_defaults();
    cfg.d = 20;
    cfg.rho_u = 1e-1;
    return cfg;
}

SeriesMatrix load_dataset(const DatasetSpec& spec) {
    if (spec.synthetic) return gen_synthetic(spec.synthetic_spec).series;
    return normalize(load_matrix(spec.path, spec.format), spec.normalize);
}

nlohmann::json to_json(const ForecasterConfig& config) {
    return {
        {"method", std::string(to_string(config.method))},
        {"d", config.d},
        {"P", config.P},
        {"r0", config.r0},
        {"rho_u", config.rho_u},
        {"eps", config.eps},
        {"rho_v", config.rho_v},
        {"max_ite", config.max_ite},
        {"seed", config.seed},
        {"zt_v_prior", config.zt_v_prior},
    };
}

nlohmann::json to_json(const ExperimentConfig& config) {
    nlohmann::json dataset;
    if (config.dataset.synthetic) {
        const auto& s = config.dataset.synthetic_spec;
        dataset = {
            {"kind", "synthetic"},
            {"M", s.M},
            {"d", s.d},
            {"theta", s.theta},
            {"noise", {{"factor", s.noise.factor}, {"latent", s.noise.latent}, {"observation", s.noise.observation}}},
            {"T", s.T},
            {"seed", s.seed},
        };
    } else {
        const auto& f = config.dataset.format;
        dataset = {
            {"kind", "file"},
            {"path", config.dataset.path.string()},
            {"delimiter", std::string(1, f.delimiter)},
            {"decimal_separator", std::string(1, f.decimal_separator)},
            {"header_rows", f.header_rows},
            {"index_cols", f.index_cols},
            {"rows_are_time", f.rows_are_time},
            {"aggregate", f.aggregate == Aggregate::None ? "none" : f.aggregate == Aggregate::Mean ? "mean" : "sum"},
            {"block", f.block},
            {"row_offset", f.row_offset},
            {"row_count", f.row_count},
            {"time_offset", f.time_offset},
            {"time_count", f.time_count},
            {"normalize", config.dataset.normalize == NormalizeMode::Global ? "global" : "per-row"},
        };
    }
    const auto& m = config.mask;
    return {
        {"dataset", dataset},
        {"mask",
         {{"kind", m.kind},
          {"nnz", m.nnz},
          {"exact_per_column", m.exact_per_column},
          {"arrival", m.arrival},
          {"departure", m.departure}}},
        {"predictor", std::string(to_string(config.predictor.kind))},
        {"model", to_json(config.predictor.model)},
        {"fill", config.predictor.fill == FillMode::Predict ? "predict" : "zero"},
        {"pmf_prior", config.predictor.pmf_prior == PmfPrior::Previous ? "previous" : "zero"},
        {"replicates", config.replicates},
        {"base_seed", config.base_seed},
    };
}

double mae(std::span<const StepRecord> records, double scale) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : records) {
        sum += r.abs_error_sum;
        n += r.n_observed;
    }
    if (n == 0) throw UndefinedMetricError("mae: no observed entries");
    return sum / static_cast<double>(n) * scale;
}

std::uint64_t replicate_seed(std::uint64_t base_seed, std::size_t replicate) {
    return base_seed + replicate;
}

StreamResult run_stream(const PredictorConfig& predictor, const SeriesMatrix& data, const SparsityMask& mask,
                        std::size_t replicate) {
    if (mask.M() != data.M() || mask.T() != data.T()) {
        throw ParameterError("run_stream: mask shape does not match the data");
    }
    auto model = make_predictor(predictor, data.M());
    const bool per_row = !data.row_scales.empty();

    StreamResult result;
    result.records.reserve(data.T());
    for (std::size_t t = 1; t <= data.T(); ++t) {
        const ObservationSlice slice = make_slice(data, mask, t);
        const ForecastRecord rec = model->step(slice);
        StepRecord out = summarize(rec, replicate);
        if (per_row) {
            double sum = 0.0;
            for (std::size_t k = 0; k < slice.indices.size(); ++k) {
                const auto i = slice.indices[k];
                sum += std::abs(rec.x_hat(static_cast<Eigen::Index>(i)) - slice.values(static_cast<Eigen::Index>(k))) *
                       data.scale_of(i);
            }
            out.abs_error_sum = sum;
        }
        result.records.push_back(out);
    }
    result.mae = mae(result.records, per_row ? 1.0 : data.scale);
    return result;
}

ExperimentSummary run_experiment(const ExperimentConfig& config, const SeriesMatrix& data) {
    if (config.replicates < 1) throw ParameterError("run_experiment: replicates must be >= 1");
    config.predictor.model.validate();

    std::vector<StreamResult> results(config.replicates);
    parallel_for(config.replicates, [&](std::size_t r) {
        const std::uint64_t seed = replicate_seed(config.base_seed, r);
        MaskDescriptor mask = config.mask;
        mask.seed = seed;
        PredictorConfig predictor = config.predictor;
        predictor.model.seed = mix_seed(seed, 1);
        results[r] = run_stream(predictor, data, make_mask(data.M(), data.T(), mask), r);
    });

    ExperimentSummary summary;
    for (auto& res : results) {
        summary.mae.push_back(res.mae);
        summary.records.insert(summary.records.end(), res.records.begin(), res.records.end());
    }
    const double n = static_cast<double>(summary.mae.size());
    summary.mean = std::accumulate(summary.mae.begin(), summary.mae.end(), 0.0) / n;
    if (summary.mae.size() > 1) {
        double ss = 0.0;
        for (double m : summary.mae) ss += (m - summary.mean) * (m - summary.mean);
        summary.std = std::sqrt(ss / (n - 1.0));
    }
    return summary;
}

ResultTable make_result_table(const ExperimentConfig& config, const SeriesMatrix& data,
                              const ExperimentSummary& summary) {
    ResultTable table;
    table.records = summary.records;
    table.metadata = {
        {"config", to_json(config)},
        {"data", {{"M", data.M()}, {"T", data.T()}, {"scale", data.scale}, {"fingerprint", fingerprint(data.values)}}},
        {"mae", summary.mae},
        {"mean_mae", summary.mean},
        {"std_mae", summary.std},
    };
    return table;
}

SyntheticSpec electricity_surrogate(std::size_t M, std::size_t T, std::uint64_t seed) {
    SyntheticSpec spec;
    spec.M = M;
    spec.d = 5;
    spec.T = T;
    spec.seed = seed;
    spec.theta.assign(24, 0.0);
    spec.theta[0] = 0.3;
    spec.theta[23] = 0.65;
    spec.noise = NoiseScales{0.01, 0.3, 0.02};
    spec.magnitude_spread = 2.0;
    return spec;
}

std::string_view to_string(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::Nnz: return "nnz";
        case SweepAxis::Departure: return "departure";
        case SweepAxis::Rank: return "d";
        case SweepAxis::Order: return "P";
    }
    return "?";
}

SweepAxis parse_axis(std::string_view name) {
    std::string lower;
    for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (lower == "nnz") return SweepAxis::Nnz;
    if (lower == "departure" || lower == "departure_rate") return SweepAxis::Departure;
    if (lower == "d" || lower == "rank") return SweepAxis::Rank;
    if (lower == "p" || lower == "order") return SweepAxis::Order;
    throw ParameterError("unknown sweep axis '" + std::string(name) + "'");
}

namespace {

ExperimentConfig apply_axis(ExperimentConfig cfg, SweepAxis axis, double value, PredictorKind method) {
    cfg.predictor.kind = method;
    switch (axis) {
        case SweepAxis::Nnz:
            if (!(value > 0.0 && value <= 1.0)) throw ParameterError("sweep: nnz values must lie in (0, 1]");
            cfg.mask.kind = "unstructured";
            cfg.mask.nnz = value;
            break;
        case SweepAxis::Departure:
            if (!(value > 0.0 && value <= 1.0)) throw ParameterError("sweep: departure values must lie in (0, 1]");
            cfg.mask.kind = "structured";
            cfg.mask.departure = value;
            break;
        case SweepAxis::Rank:
        case SweepAxis::Order: {
            if (!(value >= 1.0) || value != std::floor(value)) {
                throw ParameterError("sweep: d and P values must be positive integers");
            }
            (axis == SweepAxis::Rank ? cfg.predictor.model.d : cfg.predictor.model.P) = static_cast<int>(value);
            break;
        }
    }
    return cfg;
}

}  // namespace

std::vector<SweepRow> run_sweep(const ExperimentConfig& base, const SweepSpec& sweep, const SeriesMatrix& data) {
    if (sweep.values.empty() || sweep.methods.empty()) {
        throw ParameterError("sweep: needs at least one value and one method");
    }
    std::vector<ExperimentConfig> cells;
    std::vector<SweepRow> rows;
    for (double value : sweep.values) {
        for (PredictorKind method : sweep.methods) {
            cells.push_back(apply_axis(base, sweep.axis, value, method));
            cells.back().predictor.model.validate();
            rows.push_back(SweepRow{value, method, 0.0, 0.0, {}});
        }
    }
    // Cells run one after another; each runs its replicates in parallel.
    for (std::size_t k = 0; k < cells.size(); ++k) {
        const ExperimentSummary s = run_experiment(cells[k], data);
        rows[k].mean = s.mean;
        rows[k].std = s.std;
        rows[k].mae = s.mae;
    }
    std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
        if (a.axis_value != b.axis_value) return a.axis_value < b.axis_value;
        return static_cast<int>(a.method) < static_cast<int>(b.method);
    });
    return rows;
}

std::string format_sweep(SweepAxis axis, const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "axis,value,method,mean_mae,std_mae,replicates\n";
    for (const auto& r : rows) {
        out << to_string(axis) << ',' << format_real(r.axis_value) << ',' << to_string(r.method) << ','
            << format_real(r.mean) << ',' << format_real(r.std) << ',' << r.mae.size() << '\n';
    }
    return out.str();
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& task) {
    const std::size_t workers =
        std::min<std::size_t>(count, std::max<std::size_t>(1, std::thread::hardware_concurrency()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    task(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace ofmf
