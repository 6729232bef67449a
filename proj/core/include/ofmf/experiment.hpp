#pragma once

#include "ofmf/baselines.hpp"
#include "ofmf/data_io.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace ofmf {

/// Configurations used for the electricity and traffic benchmarks.
/// The method-specific fields (rho_u, eps) are all filled in; callers pick
/// the method.
ForecasterConfig electricity_defaults();
ForecasterConfig traffic_defaults();

struct DatasetSpec {
    bool synthetic = false;
    std::filesystem::path path;
    LoadFormat format;
    NormalizeMode normalize = NormalizeMode::Global;
    SyntheticSpec synthetic_spec;
};

/// Loads and normalizes (or generates) the dataset.
SeriesMatrix load_dataset(const DatasetSpec& spec);

struct ExperimentConfig {
    DatasetSpec dataset;
    MaskDescriptor mask;  // seed is replaced per replicate
    PredictorConfig predictor;
    std::size_t replicates = 1;
    std::uint64_t base_seed = 1;
};

nlohmann::json to_json(const ExperimentConfig& config);
nlohmann::json to_json(const ForecasterConfig& config);

/// Mean absolute error over observed entries, times `scale`.
/// Throws UndefinedMetricError when nothing was observed.
double mae(std::span<const StepRecord> records, double scale);

/// Seed of replicate r: base_seed + r. Masks use it directly; predictor
/// initialization uses a mixed stream of it.
std::uint64_t replicate_seed(std::uint64_t base_seed, std::size_t replicate);

struct StreamResult {
    std::vector<StepRecord> records;
    double mae = 0.0;  // original units
};

/// Runs one predictor over the whole matrix under `mask`. With per-row
/// scales, record errors are reported in original units.
StreamResult run_stream(const PredictorConfig& predictor, const SeriesMatrix& data, const SparsityMask& mask,
                        std::size_t replicate = 0);

struct ExperimentSummary {
    std::vector<double> mae;  // per replicate, original units
    double mean = 0.0;
    double std = 0.0;         // sample standard deviation; 0 for one replicate
    std::vector<StepRecord> records;
};

/// Replicates differ in mask seed and predictor initialization seed; they run
/// in parallel and are collected in replicate order.
ExperimentSummary run_experiment(const ExperimentConfig& config, const SeriesMatrix& data);

enum class SweepAxis { Nnz, Departure, Rank, Order };

std::string_view to_string(SweepAxis axis);
SweepAxis parse_axis(std::string_view name);

struct SweepSpec {
    SweepAxis axis = SweepAxis::Nnz;
    std::vector<double> values;
    std::vector<PredictorKind> methods;
};

struct SweepRow {
    double axis_value = 0.0;
    PredictorKind method = PredictorKind::FP;
    double mean = 0.0;
    double std = 0.0;
    std::vector<double> mae;

    friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

/// One row per (axis value, method), sorted by axis value then method.
std::vector<SweepRow> run_sweep(const ExperimentConfig& base, const SweepSpec& sweep, const SeriesMatrix& data);

/// CSV: axis,value,method,mean_mae,std_mae,replicates
std::string format_sweep(SweepAxis axis, const std::vector<SweepRow>& rows);

/// Table written by `run`: the per-step records plus metadata holding the
/// configuration, dataset shape and fingerprint, per-replicate MAE, mean and std.
ResultTable make_result_table(const ExperimentConfig& config, const SeriesMatrix& data,
                              const ExperimentSummary& summary);

/// Synthetic stand-in for the electricity slice: hourly-style series with a
/// daily AR structure (P = 24) and slowly drifting loadings.
SyntheticSpec electricity_surrogate(std::size_t M = 50, std::size_t T = 2000, std::uint64_t seed = 7);

/// Runs `count` independent tasks on up to hardware_concurrency threads.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& task);

}  // namespace ofmf
