#include "ofmf/errors.hpp"
#include "ofmf/experiment.hpp"

#include "checks.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

using namespace ofmf;

namespace {

struct DatasetFlags {
    std::string input;
    std::string format = "csv";  // csv | electricity
    char delimiter = ',';
    char decimal = '.';
    std::size_t header_rows = 0;
    std::size_t index_cols = 0;
    bool rows_are_time = false;
    std::string aggregate = "none";
    std::size_t block = 4;
    std::size_t row_offset = 0;
    std::size_t rows = 0;
    std::size_t time_offset = 0;
    std::size_t steps = 0;
    std::string normalize = "global";

    bool surrogate = false;
    SyntheticSpec synth;
    std::vector<double> noise{0.01, 1.0, 0.01};
};

struct MaskFlags {
    MaskDescriptor mask;
};

struct ModelFlags {
    std::string preset = "electricity";
    std::string method = "FP";
    ForecasterConfig model;  // override values; applied only when given
    CLI::Option* d = nullptr;
    CLI::Option* P = nullptr;
    CLI::Option* r0 = nullptr;
    CLI::Option* rho_u = nullptr;
    CLI::Option* rho_v = nullptr;
    CLI::Option* eps = nullptr;
    CLI::Option* max_ite = nullptr;
    bool zt_v_prior = false;
    std::string fill = "predict";
    std::string pmf_prior = "previous";
    std::size_t replicates = 1;
    std::uint64_t seed = 1;
};

void add_synthetic_flags(CLI::App* app, DatasetFlags& f) {
    app->add_option("--synth-M", f.synth.M, "Synthetic series count")->capture_default_str();
    app->add_option("--synth-T", f.synth.T, "Synthetic time steps")->capture_default_str();
    app->add_option("--synth-d", f.synth.d, "Synthetic latent rank")->capture_default_str();
    app->add_option("--theta", f.synth.theta, "Synthetic AR coefficients")->capture_default_str()->delimiter(',');
    app->add_option("--noise", f.noise, "Uniform noise half-widths: factor,latent,observation")
        ->capture_default_str()
        ->delimiter(',')
        ->expected(3);
    app->add_option("--synth-seed", f.synth.seed, "Synthetic generator seed")->capture_default_str();
    app->add_option("--spread", f.synth.magnitude_spread, "Per-series magnitude spread in decades")
        ->capture_default_str();
    app->add_flag("--surrogate", f.surrogate,
                  "Use the electricity-like surrogate (d=5, 24 lags) sized by --synth-M/--synth-T/--synth-seed");
}

void add_dataset_flags(CLI::App* app, DatasetFlags& f) {
    app->add_option("--input", f.input, "Delimited numeric table; synthetic data when omitted");
    app->add_option("--format", f.format, "Table layout preset")
        ->check(CLI::IsMember({"csv", "electricity"}))
        ->capture_default_str();
    app->add_option("--delimiter", f.delimiter, "Cell delimiter")->capture_default_str();
    app->add_option("--decimal", f.decimal, "Decimal separator")->capture_default_str();
    app->add_option("--header-rows", f.header_rows, "Header lines to skip")->capture_default_str();
    app->add_option("--index-cols", f.index_cols, "Leading index columns to skip")->capture_default_str();
    app->add_flag("--rows-are-time", f.rows_are_time, "Input rows are time steps");
    app->add_option("--aggregate", f.aggregate, "Time aggregation")
        ->check(CLI::IsMember({"none", "mean", "sum"}))
        ->capture_default_str();
    app->add_option("--block", f.block, "Raw steps per aggregated step")->capture_default_str();
    app->add_option("--row-offset", f.row_offset, "First series kept")->capture_default_str();
    app->add_option("--rows", f.rows, "Series kept (0 = all)")->capture_default_str();
    app->add_option("--time-offset", f.time_offset, "First time step kept")->capture_default_str();
    app->add_option("--steps", f.steps, "Time steps kept (0 = all)")->capture_default_str();
    app->add_option("--normalize", f.normalize, "Normalization")
        ->check(CLI::IsMember({"global", "per-row"}))
        ->capture_default_str();
    add_synthetic_flags(app, f);
}

void add_mask_flags(CLI::App* app, MaskFlags& f) {
    app->add_option("--mask", f.mask.kind, "Sparsity pattern")
        ->check(CLI::IsMember({"full", "unstructured", "structured"}))
        ->capture_default_str();
    app->add_option("--nnz", f.mask.nnz, "Observed fraction (unstructured)")->capture_default_str();
    app->add_flag("--exact-per-column", f.mask.exact_per_column, "Exactly round(nnz*M) observations per step");
    app->add_option("--arrival", f.mask.arrival, "Observed-to-missing probability (structured)")
        ->capture_default_str();
    app->add_option("--departure", f.mask.departure, "Missing-to-observed probability (structured)")
        ->capture_default_str();
}

void add_model_flags(CLI::App* app, ModelFlags& f, bool with_method) {
    app->add_option("--preset", f.preset, "Hyperparameter preset")
        ->check(CLI::IsMember({"electricity", "traffic"}))
        ->capture_default_str();
    if (with_method) {
        app->add_option("--method", f.method, "BASE, AR, PMF, NAIVE, FP, FT, ZT (LN-MF = ZT)")->capture_default_str();
    }
    f.d = app->add_option("--d", f.model.d, "Latent rank");
    f.P = app->add_option("--P", f.model.P, "AR order");
    f.r0 = app->add_option("--r0", f.model.r0, "AR prior scale");
    f.rho_u = app->add_option("--rho-u", f.model.rho_u, "Factor penalty (FP, NAIVE, PMF)");
    f.rho_v = app->add_option("--rho-v", f.model.rho_v, "Latent penalty");
    f.eps = app->add_option("--eps", f.model.eps, "Residual tolerance (FT)");
    f.max_ite = app->add_option("--max-ite", f.model.max_ite, "Alternations per step");
    app->add_flag("--zt-v-prior", f.zt_v_prior, "Centre the ZT latent update on the AR prior");
    app->add_option("--fill", f.fill, "AR baseline fill")
        ->check(CLI::IsMember({"predict", "zero"}))
        ->capture_default_str();
    app->add_option("--pmf-prior", f.pmf_prior, "PMF latent prior")
        ->check(CLI::IsMember({"previous", "zero"}))
        ->capture_default_str();
    app->add_option("--replicates", f.replicates, "Mask/initialization replicates")->capture_default_str();
    app->add_option("--seed", f.seed, "Base seed; replicate r uses seed + r")->capture_default_str();
}

DatasetSpec dataset_spec(const DatasetFlags& f) {
    DatasetSpec spec;
    spec.normalize = f.normalize == "per-row" ? NormalizeMode::PerRow : NormalizeMode::Global;
    if (f.input.empty()) {
        spec.synthetic = true;
        if (f.surrogate) {
            spec.synthetic_spec = electricity_surrogate(f.synth.M, f.synth.T, f.synth.seed);
        } else {
            spec.synthetic_spec = f.synth;
            spec.synthetic_spec.noise = NoiseScales{f.noise[0], f.noise[1], f.noise[2]};
        }
        return spec;
    }
    spec.path = f.input;
    LoadFormat& fmt = spec.format;
    if (f.format == "electricity") {
        fmt.delimiter = ';';
        fmt.decimal_separator = ',';
        fmt.header_rows = 1;
        fmt.index_cols = 1;
        fmt.rows_are_time = true;
        fmt.aggregate = Aggregate::Mean;
        fmt.block = 4;
    } else {
        fmt.delimiter = f.delimiter;
        fmt.decimal_separator = f.decimal;
        fmt.header_rows = f.header_rows;
        fmt.index_cols = f.index_cols;
        fmt.rows_are_time = f.rows_are_time;
        fmt.aggregate = f.aggregate == "mean" ? Aggregate::Mean : f.aggregate == "sum" ? Aggregate::Sum : Aggregate::None;
        fmt.block = f.block;
    }
    fmt.row_offset = f.row_offset;
    fmt.row_count = f.rows;
    fmt.time_offset = f.time_offset;
    fmt.time_count = f.steps;
    return spec;
}

ExperimentConfig experiment_config(const DatasetFlags& data, const MaskFlags& mask, const ModelFlags& m) {
    ExperimentConfig cfg;
    cfg.dataset = dataset_spec(data);
    cfg.mask = mask.mask;
    cfg.predictor.kind = parse_predictor(m.method);
    ForecasterConfig model = m.preset == "traffic" ? traffic_defaults() : electricity_defaults();
    if (*m.d) model.d = m.model.d;
    if (*m.P) model.P = m.model.P;
    if (*m.r0) model.r0 = m.model.r0;
    if (*m.rho_u) model.rho_u = m.model.rho_u;
    if (*m.rho_v) model.rho_v = m.model.rho_v;
    if (*m.eps) model.eps = m.model.eps;
    if (*m.max_ite) model.max_ite = m.model.max_ite;
    model.zt_v_prior = m.zt_v_prior;
    cfg.predictor.model = model;
    cfg.predictor.fill = m.fill == "zero" ? FillMode::Zero : FillMode::Predict;
    cfg.predictor.pmf_prior = m.pmf_prior == "zero" ? PmfPrior::Zero : PmfPrior::Previous;
    cfg.replicates = m.replicates;
    cfg.base_seed = m.seed;
    return cfg;
}

void write_text_file(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw IoError("write failed for '" + path + "'");
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Online matrix factorization forecaster for multivariate series with missing entries"};
    app.require_subcommand(1);

    DatasetFlags run_data;
    MaskFlags run_mask;
    ModelFlags run_model;
    std::string run_out = "results.csv";
    auto* run = app.add_subcommand("run", "Run one predictor over a dataset and write per-step records");
    add_dataset_flags(run, run_data);
    add_mask_flags(run, run_mask);
    add_model_flags(run, run_model, true);
    run->add_option("--out", run_out, "Record table; metadata goes to <out>.meta.json")->capture_default_str();

    DatasetFlags sweep_data;
    MaskFlags sweep_mask;
    ModelFlags sweep_model;
    std::string sweep_axis = "nnz";
    std::vector<double> sweep_values;
    std::vector<std::string> sweep_methods{"FP", "FT", "ZT"};
    std::string sweep_out = "-";
    auto* sweep = app.add_subcommand("sweep", "Sweep one parameter over several predictors");
    add_dataset_flags(sweep, sweep_data);
    add_mask_flags(sweep, sweep_mask);
    add_model_flags(sweep, sweep_model, false);
    sweep->add_option("--axis", sweep_axis, "nnz, departure, d or P")->capture_default_str();
    sweep->add_option("--values", sweep_values, "Axis values")->delimiter(',')->required();
    sweep->add_option("--methods", sweep_methods, "Predictors")->delimiter(',')->capture_default_str();
    sweep->add_option("--out", sweep_out, "CSV table, '-' for stdout")->capture_default_str();

    DatasetFlags synth_data;
    std::string synth_out = "synthetic.csv";
    std::string synth_latent;
    auto* synth = app.add_subcommand("synth", "Generate a normalized synthetic series matrix");
    add_synthetic_flags(synth, synth_data);
    synth->add_option("--out", synth_out, "Matrix CSV (series are rows)")->capture_default_str();
    synth->add_option("--latent-out", synth_latent, "Optional latent trajectory CSV");

    MaskFlags mask_flags;
    std::size_t mask_M = 50;
    std::size_t mask_T = 1000;
    std::string mask_out = "mask.csv";
    auto* mask = app.add_subcommand("mask", "Generate an observation mask (1 = observed)");
    add_mask_flags(mask, mask_flags);
    mask->add_option("--M", mask_M, "Series")->capture_default_str();
    mask->add_option("--T", mask_T, "Time steps")->capture_default_str();
    mask->add_option("--seed", mask_flags.mask.seed, "Seed")->capture_default_str();
    mask->add_option("--out", mask_out, "Mask CSV")->capture_default_str();

    std::string verify_electricity;
    std::vector<int> verify_only;
    std::string verify_work = (std::filesystem::temp_directory_path() / "ofmf_verify").string();
    auto* verify = app.add_subcommand("verify", "Run the property and oracle checks");
    verify->add_option("--electricity", verify_electricity, "Raw electricity table for the ordering checks");
    verify->add_option("--only", verify_only, "Check ids")->delimiter(',');
    verify->add_option("--work-dir", verify_work, "Scratch directory")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            const auto start = std::chrono::steady_clock::now();
            const ExperimentConfig cfg = experiment_config(run_data, run_mask, run_model);
            const SeriesMatrix data = load_dataset(cfg.dataset);
            const ExperimentSummary summary = run_experiment(cfg, data);
            write_results(make_result_table(cfg, data, summary), run_out);
            std::cout << "method " << to_string(cfg.predictor.kind) << " M=" << data.M() << " T=" << data.T()
                      << " replicates=" << summary.mae.size() << '\n';
            for (std::size_t r = 0; r < summary.mae.size(); ++r) {
                std::cout << "replicate " << r << " mae " << format_real(summary.mae[r]) << '\n';
            }
            std::cout << "mean_mae " << format_real(summary.mean) << " std_mae " << format_real(summary.std) << '\n';
            std::cerr << "run: " << seconds_since(start) << " s\n";
        } else if (*sweep) {
            const auto start = std::chrono::steady_clock::now();
            sweep_model.method = sweep_methods.empty() ? "FP" : sweep_methods.front();
            const ExperimentConfig cfg = experiment_config(sweep_data, sweep_mask, sweep_model);
            SweepSpec spec;
            spec.axis = parse_axis(sweep_axis);
            spec.values = sweep_values;
            for (const auto& m : sweep_methods) spec.methods.push_back(parse_predictor(m));
            const SeriesMatrix data = load_dataset(cfg.dataset);
            write_text_file(sweep_out, format_sweep(spec.axis, run_sweep(cfg, spec, data)));
            std::cerr << "sweep: " << spec.values.size() * spec.methods.size() << " cells, "
                      << seconds_since(start) << " s\n";
        } else if (*synth) {
            const DatasetSpec spec = dataset_spec(synth_data);
            const SyntheticData out = gen_synthetic(spec.synthetic_spec);
            write_matrix(out.series.values, synth_out);
            if (!synth_latent.empty()) write_matrix(out.latent, synth_latent);
            std::cout << "wrote " << out.series.M() << "x" << out.series.T() << " matrix, scale "
                      << format_real(out.series.scale) << '\n';
        } else if (*mask) {
            const SparsityMask m = make_mask(mask_M, mask_T, mask_flags.mask);
            write_mask(m, mask_out);
            std::cout << "observed fraction " << format_real(m.observed_fraction()) << '\n';
        } else if (*verify) {
            ofmf::checks::CheckOptions options;
            options.electricity_path = verify_electricity;
            options.work_dir = verify_work;
            int failed = 0;
            for (const auto& r : ofmf::checks::run_checks(options, verify_only)) {
                std::cout << ofmf::checks::format_result(r) << std::endl;
                if (!r.pass) ++failed;
            }
            return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << '\n';
        return 3;
    }
    return EXIT_SUCCESS;
}
