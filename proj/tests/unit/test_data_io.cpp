#include <gtest/gtest.h>

#include "ofmf/data_io.hpp"
#include "ofmf/errors.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>

using namespace ofmf;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "ofmf_unit";
    std::filesystem::create_directories(dir);
    return dir / name;
}

// Upper 1% point of chi-square with k degrees of freedom (Wilson-Hilferty).
double chi_square_critical(double k) {
    const double z = 2.3263478740408408;
    const double a = 2.0 / (9.0 * k);
    return k * std::pow(1.0 - a + z * std::sqrt(a), 3.0);
}

}  // namespace

TEST(Parse, PlainTable) {
    const SeriesMatrix m = parse_matrix("1,2,3,4\n5,6,7,8\n", LoadFormat{});
    ASSERT_EQ(m.M(), 2U);
    ASSERT_EQ(m.T(), 4U);
    EXPECT_EQ(m.values(1, 2), 7.0);
}

TEST(Parse, BlockMean) {
    LoadFormat f;
    f.aggregate = Aggregate::Mean;
    f.block = 4;
    const SeriesMatrix m = parse_matrix("1,2,3,4,5,6,7,8\n", f);
    ASSERT_EQ(m.T(), 2U);
    EXPECT_DOUBLE_EQ(m.values(0, 0), 2.5);
    EXPECT_DOUBLE_EQ(m.values(0, 1), 6.5);
    f.aggregate = Aggregate::Sum;
    EXPECT_DOUBLE_EQ(parse_matrix("1,2,3,4,5,6,7,8\n", f).values(0, 1), 26.0);
}

TEST(Parse, DecimalCommaWithHeaderAndIndex) {
    LoadFormat f;
    f.delimiter = ';';
    f.decimal_separator = ',';
    f.header_rows = 1;
    f.index_cols = 1;
    f.rows_are_time = true;
    const std::string text = "\"\";\"A\";\"B\"\n\"t1\";1,5;2\n\"t2\";3;4,25\n";
    const SeriesMatrix m = parse_matrix(text, f);
    ASSERT_EQ(m.M(), 2U);
    ASSERT_EQ(m.T(), 2U);
    EXPECT_DOUBLE_EQ(m.values(0, 0), 1.5);
    EXPECT_DOUBLE_EQ(m.values(1, 1), 4.25);
}

TEST(Parse, TimeRowsAggregateAndWindow) {
    LoadFormat f;
    f.rows_are_time = true;
    f.aggregate = Aggregate::Mean;
    f.block = 2;
    f.time_offset = 1;
    f.row_count = 1;
    const SeriesMatrix m = parse_matrix("1,10\n3,30\n5,50\n7,70\n9,90\n", f);
    ASSERT_EQ(m.M(), 1U);
    ASSERT_EQ(m.T(), 1U);  // trailing partial block dropped, first block skipped
    EXPECT_DOUBLE_EQ(m.values(0, 0), 6.0);
}

TEST(Parse, Errors) {
    try {
        parse_matrix("1,2\n3\n", LoadFormat{});
        FAIL() << "ragged row accepted";
    } catch (const IngestionError& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
    }
    try {
        parse_matrix("1,2\n3,x\n", LoadFormat{});
        FAIL() << "bad cell accepted";
    } catch (const IngestionError& e) {
        EXPECT_NE(std::string(e.what()).find("column 2"), std::string::npos) << e.what();
    }
    EXPECT_THROW(parse_matrix("", LoadFormat{}), IngestionError);
    EXPECT_THROW(load_matrix(temp_file("does_not_exist.csv"), LoadFormat{}), IoError);
}

TEST(Normalize, GlobalScale) {
    SeriesMatrix m;
    m.values = Matrix(2, 2);
    m.values << 50, -200, 100, 25;
    const SeriesMatrix n = normalize(m);
    EXPECT_DOUBLE_EQ(n.scale, 200.0);
    EXPECT_DOUBLE_EQ(n.values.cwiseAbs().maxCoeff(), 1.0);
    EXPECT_LE((denormalize(n).values - m.values).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Normalize, AlreadyUnitRange) {
    SeriesMatrix m;
    m.values = Matrix::Constant(2, 3, 0.04);
    m.values(1, 2) = 0.8;
    EXPECT_DOUBLE_EQ(normalize(m).scale, 0.8);
}

TEST(Normalize, PerRow) {
    SeriesMatrix m;
    m.values = Matrix(2, 2);
    m.values << 2, 4, 10, -5;
    const SeriesMatrix n = normalize(m, NormalizeMode::PerRow);
    EXPECT_EQ(n.row_scales, (std::vector<double>{4.0, 10.0}));
    EXPECT_DOUBLE_EQ(n.values(0, 0), 0.5);
    EXPECT_DOUBLE_EQ(n.scale_of(1), 10.0);
    EXPECT_LE((denormalize(n).values - m.values).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Normalize, ZeroMatrix) {
    SeriesMatrix m;
    m.values = Matrix::Zero(2, 2);
    EXPECT_THROW(normalize(m), DegenerateInputError);
}

TEST(Masks, FullObservation) {
    const SparsityMask m = gen_unstructured_mask(10, 20, 1.0, 3);
    EXPECT_EQ(m.observed_fraction(), 1.0);
    EXPECT_EQ(full_mask(3, 4).observed_fraction(), 1.0);
}

TEST(Masks, UnstructuredFraction) {
    const SparsityMask m = gen_unstructured_mask(1000, 1000, 0.5, 4);
    EXPECT_NEAR(m.observed_fraction(), 0.5, 0.002);
}

TEST(Masks, Reproducible) {
    const SparsityMask a = gen_unstructured_mask(30, 40, 0.3, 5);
    const SparsityMask b = gen_unstructured_mask(30, 40, 0.3, 5);
    const SparsityMask c = gen_unstructured_mask(30, 40, 0.3, 6);
    bool same = true, differs = false;
    for (std::size_t t = 0; t < 40; ++t)
        for (std::size_t i = 0; i < 30; ++i) {
            same = same && a.observed(i, t) == b.observed(i, t);
            differs = differs || a.observed(i, t) != c.observed(i, t);
        }
    EXPECT_TRUE(same);
    EXPECT_TRUE(differs);
}

TEST(Masks, ExactPerColumn) {
    const SparsityMask m = gen_unstructured_mask(20, 50, 0.35, 7, true);
    for (std::size_t t = 0; t < 50; ++t) EXPECT_EQ(m.column_count(t), 7U);
}

TEST(Masks, ColumnCountsAreBinomial) {
    const std::size_t M = 20;
    const std::size_t T = 10000;
    const double p = 0.5;
    const SparsityMask m = gen_unstructured_mask(M, T, p, 8);
    std::vector<double> observed(M + 1, 0.0);
    for (std::size_t t = 0; t < T; ++t) observed[m.column_count(t)] += 1.0;
    // Pool tails so every bin expects at least 5.
    std::vector<double> expected(M + 1);
    for (std::size_t k = 0; k <= M; ++k) {
        expected[k] = static_cast<double>(T) * std::exp(std::lgamma(M + 1.0) - std::lgamma(k + 1.0) -
                                                        std::lgamma(static_cast<double>(M - k) + 1.0)) *
                      std::pow(p, static_cast<double>(k)) * std::pow(1 - p, static_cast<double>(M - k));
    }
    double stat = 0.0;
    double obs_acc = 0.0, exp_acc = 0.0;
    int bins = 0;
    for (std::size_t k = 0; k <= M; ++k) {
        obs_acc += observed[k];
        exp_acc += expected[k];
        if (exp_acc >= 5.0 || k == M) {
            stat += (obs_acc - exp_acc) * (obs_acc - exp_acc) / exp_acc;
            ++bins;
            obs_acc = exp_acc = 0.0;
        }
    }
    EXPECT_LT(stat, chi_square_critical(bins - 1));
}

TEST(Masks, StructuredStationaryFraction) {
    const SparsityMask m = gen_structured_mask(20, 100000, 5e-2, 5e-3, 9);
    EXPECT_NEAR(1.0 - m.observed_fraction(), 0.05 / 0.055, 0.02);
}

TEST(Masks, StructuredStartsObservedAndRunLengths) {
    const double departure = 0.25;
    const SparsityMask m = gen_structured_mask(10, 20000, 0.1, departure, 10);
    double runs = 0.0, total = 0.0;
    for (std::size_t i = 0; i < 10; ++i) {
        EXPECT_TRUE(m.observed(i, 0));
        std::size_t len = 0;
        for (std::size_t t = 0; t < m.T(); ++t) {
            if (!m.observed(i, t)) {
                ++len;
            } else if (len > 0) {
                runs += 1.0;
                total += static_cast<double>(len);
                len = 0;
            }
        }
    }
    EXPECT_NEAR(total / runs, 1.0 / departure, 0.15);
}

TEST(Masks, StructuredUnitDepartureGivesSingleSteps) {
    const SparsityMask m = gen_structured_mask(5, 5000, 0.3, 1.0, 11);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t t = 1; t < m.T(); ++t) ASSERT_TRUE(m.observed(i, t) || m.observed(i, t - 1));
}

TEST(Masks, StructuredNoArrivals) {
    EXPECT_EQ(gen_structured_mask(10, 10000, 1e-9, 0.5, 12).observed_fraction(), 1.0);
}

TEST(Masks, StructuredRowsIndependent) {
    const std::size_t T = 100000;
    const SparsityMask m = gen_structured_mask(4, T, 0.3, 0.5, 13);
    for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t b = a + 1; b < 4; ++b) {
            double ma = 0, mb = 0, sab = 0, saa = 0, sbb = 0;
            for (std::size_t t = 0; t < T; ++t) {
                ma += m.observed(a, t);
                mb += m.observed(b, t);
            }
            ma /= T;
            mb /= T;
            for (std::size_t t = 0; t < T; ++t) {
                const double xa = m.observed(a, t) - ma, xb = m.observed(b, t) - mb;
                sab += xa * xb;
                saa += xa * xa;
                sbb += xb * xb;
            }
            EXPECT_LE(std::abs(sab / std::sqrt(saa * sbb)), 0.02);
        }
}

TEST(Masks, Errors) {
    EXPECT_THROW(gen_unstructured_mask(2, 2, 0.0, 1), ParameterError);
    EXPECT_THROW(gen_structured_mask(2, 2, 0.0, 0.5, 1), ParameterError);
    MaskDescriptor d;
    d.kind = "checkerboard";
    EXPECT_THROW(make_mask(2, 2, d), ParameterError);
}

TEST(Slices, FollowMask) {
    SeriesMatrix s;
    s.values = Matrix(3, 2);
    s.values << 0.1, 0.2, 0.3, 0.4, 0.5, 0.6;
    SparsityMask m = full_mask(3, 2);
    m.set(1, 1, false);
    const ObservationSlice slice = make_slice(s, m, 2);
    EXPECT_EQ(slice.t, 2U);
    EXPECT_EQ(slice.indices, (std::vector<std::size_t>{0, 2}));
    EXPECT_DOUBLE_EQ(slice.values(1), 0.6);
    EXPECT_THROW(make_slice(s, m, 3), ParameterError);
}

TEST(Synthetic, NoiselessLagOneIsConstant) {
    SyntheticSpec spec;
    spec.M = 6;
    spec.T = 50;
    spec.theta = {1.0};
    spec.noise = NoiseScales{};
    const SyntheticData data = gen_synthetic(spec);
    for (std::size_t t = 1; t < spec.T; ++t) {
        EXPECT_LE((data.series.values.col(static_cast<Eigen::Index>(t)) - data.series.values.col(0)).norm(), 1e-15);
    }
}

TEST(Synthetic, NoiselessLatentFollowsRecursion) {
    SyntheticSpec spec;
    spec.T = 60;
    spec.noise = NoiseScales{};
    spec.theta = {0.5, 0.3};
    const SyntheticData data = gen_synthetic(spec);
    for (Eigen::Index t = 2; t < 60; ++t) {
        const Vector expected = 0.5 * data.latent.col(t - 1) + 0.3 * data.latent.col(t - 2);
        EXPECT_LE((data.latent.col(t) - expected).norm(), 1e-14);
    }
}

TEST(Synthetic, RankOfWindows) {
    SyntheticSpec spec;
    spec.M = 30;
    spec.T = 200;
    spec.noise = NoiseScales{0.0, 1.0, 0.0};
    const SyntheticData data = gen_synthetic(spec);
    EXPECT_DOUBLE_EQ(data.series.values.cwiseAbs().maxCoeff(), 1.0);
    for (Eigen::Index t = 0; t + 4 <= 200; t += 7) {
        const Eigen::JacobiSVD<Matrix> svd(data.series.values.middleCols(t, 4));
        const Vector s = svd.singularValues();
        EXPECT_LE(s(3), 1e-12 * s(0));
    }
}

TEST(Synthetic, DivergenceAndParameters) {
    SyntheticSpec spec;
    spec.theta = {1.5};
    EXPECT_THROW(gen_synthetic(spec), NonStationaryError);
    spec.theta = {};
    EXPECT_THROW(gen_synthetic(spec), ParameterError);
    spec.theta = {0.5};
    spec.magnitude_spread = -1.0;
    EXPECT_THROW(gen_synthetic(spec), ParameterError);
}

TEST(Synthetic, Deterministic) {
    SyntheticSpec spec;
    spec.T = 100;
    spec.magnitude_spread = 1.0;
    EXPECT_EQ(gen_synthetic(spec).series.values, gen_synthetic(spec).series.values);
}

TEST(Results, RoundTrip) {
    ResultTable table;
    table.records = {{0, 1, 3, 0.1, -2.5}, {1, 2, 0, 0.0, 1.0 / 3.0}, {2, 3, 7, 1e-300, 12345.678901234567}};
    table.metadata = {{"method", "FT"}, {"eps", 0.05}};
    const auto path = temp_file("roundtrip.csv");
    write_results(table, path);
    const ResultTable back = read_results(path);
    EXPECT_EQ(back.records, table.records);
    EXPECT_EQ(back.metadata, table.metadata);
}

TEST(Results, EmptyTableIsHeaderOnly) {
    const auto path = temp_file("empty.csv");
    write_results(ResultTable{}, path);
    std::ifstream in(path);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    EXPECT_EQ(content, "replicate,t,n_observed,abs_error_sum,checksum\n");
    EXPECT_TRUE(read_results(path).records.empty());
}

TEST(Results, LargeTableAggregate) {
    ResultTable table;
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t t = 1; t <= 100000; ++t) {
        const double e = std::sin(static_cast<double>(t)) * std::sin(static_cast<double>(t)) * 3.7;
        table.records.push_back({0, t, t % 5, e, 0.0});
        sum += e;
        n += t % 5;
    }
    const auto path = temp_file("large.csv");
    write_results(table, path);
    const ResultTable back = read_results(path);
    double sum2 = 0.0;
    std::size_t n2 = 0;
    for (const auto& r : back.records) {
        sum2 += r.abs_error_sum;
        n2 += r.n_observed;
    }
    EXPECT_EQ(n2, n);
    EXPECT_NEAR(sum2 / static_cast<double>(n2), sum / static_cast<double>(n), 1e-12);
}

TEST(Results, MissingFile) {
    EXPECT_THROW(read_results(temp_file("missing.csv")), IoError);
}

TEST(Format, RealRoundTrip) {
    for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) EXPECT_EQ(std::stod(format_real(x)), x);
}

TEST(Format, FingerprintSensitivity) {
    Matrix a = Matrix::Ones(2, 3);
    Matrix b = a;
    b(1, 2) = std::nextafter(1.0, 2.0);
    EXPECT_EQ(fingerprint(a), fingerprint(Matrix(a)));
    EXPECT_NE(fingerprint(a), fingerprint(b));
    EXPECT_NE(fingerprint(Matrix::Ones(3, 2)), fingerprint(a));
}
