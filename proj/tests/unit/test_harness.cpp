#include "tracer/harness/checkpoint.hpp"
#include "tracer/harness/config.hpp"
#include "tracer/harness/datasets.hpp"
#include "tracer/harness/idx.hpp"
#include "tracer/harness/metrics.hpp"
#include "tracer/harness/runner.hpp"

#include "tracer/autodiff/differentiate.hpp"
#include "tracer/models/quadratic.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

using namespace tracer;
using namespace tracer::harness;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("tracer_harness_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentConfig config_at(const fs::path& out, const json& patch = json::object()) {
    json j = json::parse(R"({
      "schema_version": 1,
      "dataset": {"name": "two_moons", "n_train": 200, "n_val": 50, "n_test": 200, "noise": 0.1,
                  "flip_fraction": 0.2, "seed": 3},
      "model": {"kind": "mlp", "hidden": [8], "activation": "relu"},
      "optimizer": {"name": "sgd", "lr": 0.1, "schedule": "cosine", "momentum": 0.0},
      "epochs": 4,
      "batch_size": 20,
      "output_dir": "",
      "seeds": [1, 2]
    })");
    j["output_dir"] = out.string();
    j.merge_patch(patch);
    return parse_config(j);
}

IdxArray fixture_images(std::size_t n) {
    IdxArray a;
    a.dims = {static_cast<std::uint32_t>(n), 28, 28};
    a.data.resize(n * 784);
    for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] = static_cast<std::uint8_t>((i * 37) % 256);
    return a;
}

IdxArray fixture_labels(std::size_t n) {
    IdxArray a;
    a.dims = {static_cast<std::uint32_t>(n)};
    for (std::size_t i = 0; i < n; ++i) a.data.push_back(static_cast<std::uint8_t>(i % 10));
    return a;
}

}  // namespace

TEST(Idx, HandBuiltFixtureParses) {
    const auto dir = scratch("idx");
    write_idx(dir / "img", fixture_images(10));
    write_idx(dir / "lbl", fixture_labels(10));
    const auto images = read_idx(dir / "img", kIdxImageMagic);
    const auto labels = read_idx(dir / "lbl", kIdxLabelMagic);
    EXPECT_EQ(images.count(), 10u);
    EXPECT_EQ(images.item_size(), 784u);
    const auto batch = idx_to_batch(images, labels, 10);
    EXPECT_EQ(batch.size(), 10u);
    EXPECT_EQ(batch.features(), 784);
    EXPECT_GE(batch.inputs.minCoeff(), 0.0);
    EXPECT_LE(batch.inputs.maxCoeff(), 1.0);
    EXPECT_DOUBLE_EQ(batch.inputs(0, 1), 37.0 / 255.0);
    EXPECT_EQ(batch.labels[7], 7);
    const std::string bytes = slurp(dir / "img");
    EXPECT_EQ(static_cast<unsigned char>(bytes[2]), 0x08);
    EXPECT_EQ(static_cast<unsigned char>(bytes[3]), 0x03);
}

TEST(Idx, ErrorsCarryByteOffsets) {
    auto expect_offset = [](const std::string& bytes, const std::string& offset) {
        std::istringstream in(bytes);
        try {
            read_idx(in);
            FAIL() << "expected an error";
        } catch (const TracerError& e) {
            EXPECT_NE(std::string(e.what()).find("byte offset " + offset), std::string::npos) << e.what();
        }
    };
    expect_offset(std::string("\x00\x00\x09\x03", 4), "0");
    expect_offset(std::string("\x00\x00\x08", 3), "0");
    expect_offset(std::string("\x00\x00\x08\x03\x00\x00\x00\x02\x00\x00", 10), "8");
    expect_offset(std::string("\x00\x00\x08\x01\x00\x00\x00\x00", 8), "4");
    expect_offset(std::string("\x00\x00\x08\x01\x00\x00\x00\x05\x01\x02", 10), "10");

    const auto dir = scratch("idx_magic");
    write_idx(dir / "lbl", fixture_labels(4));
    try {
        read_idx(dir / "lbl", kIdxImageMagic);
        FAIL();
    } catch (const TracerError& e) {
        EXPECT_NE(std::string(e.what()).find("byte offset 0"), std::string::npos);
    }
}

TEST(Idx, DatasetSubsamplesDeterministically) {
    const auto dir = scratch("idx_dataset");
    write_idx(dir / "img", fixture_images(30));
    write_idx(dir / "lbl", fixture_labels(30));
    DatasetSpec spec;
    spec.name = "idx_file";
    spec.images = (dir / "img").string();
    spec.labels = (dir / "lbl").string();
    spec.n_train = 12;
    spec.n_val = 3;
    spec.n_test = 5;
    spec.classes = 10;
    spec.seed = 4;
    const auto a = make_dataset(spec);
    const auto b = make_dataset(spec);
    EXPECT_EQ(a.train.inputs, b.train.inputs);
    EXPECT_EQ(a.train.size(), 12u);
    EXPECT_EQ(a.test.size(), 5u);
    spec.n_train = 40;
    EXPECT_THROW(make_dataset(spec), TracerError);
}

TEST(Datasets, DeterministicAndSeedSensitive) {
    DatasetSpec spec;
    spec.name = "two_moons";
    spec.n_train = 100;
    spec.n_test = 50;
    spec.noise = 0.2;
    spec.flip_fraction = 0.3;
    spec.seed = 9;
    const auto a = make_dataset(spec);
    const auto b = make_dataset(spec);
    EXPECT_EQ(a.train.inputs, b.train.inputs);
    EXPECT_EQ(a.train.labels, b.train.labels);
    spec.seed = 10;
    EXPECT_NE(make_dataset(spec).train.inputs, a.train.inputs);
    for (const char* name : {"gaussian_blobs", "xor"}) {
        spec.name = name;
        EXPECT_EQ(make_dataset(spec).train.inputs, make_dataset(spec).train.inputs);
    }
}

TEST(Datasets, TestSplitKeepsCleanLabels) {
    DatasetSpec spec;
    spec.name = "two_moons";
    spec.n_train = 100;
    spec.n_val = 100;
    spec.n_test = 100;
    spec.flip_fraction = 0.5;
    spec.seed = 1;
    const auto d = make_dataset(spec);
    for (std::size_t i = 0; i < d.test.size(); ++i) EXPECT_EQ(d.test.labels[i], static_cast<int>(i % 2));
    std::size_t changed = 0;
    for (std::size_t i = 0; i < d.val.size(); ++i) changed += d.val.labels[i] != static_cast<int>(i % 2);
    EXPECT_EQ(changed, 50u);
}

TEST(Datasets, BlobsAreLinearlySeparable) {
    DatasetSpec spec;
    spec.name = "gaussian_blobs";
    spec.n_train = 200;
    spec.n_test = 10;
    spec.noise = 0.0;
    spec.seed = 2;
    const auto d = make_dataset(spec);
    const auto model = make_logistic_regression(2, 2);
    Vector w = Vector::Zero(static_cast<Eigen::Index>(model.num_params()));
    for (int t = 0; t < 200; ++t) w -= 0.5 * gradient(model, w, d.train);
    EXPECT_EQ(model.accuracy(view(w), d.train), 1.0);
}

TEST(FlipLabels, ExactCountsAndDisagreement) {
    DataBatch b;
    b.inputs = Matrix::Zero(100, 1);
    for (int i = 0; i < 100; ++i) b.labels.push_back(i % 2);
    b.num_classes = 2;
    EXPECT_EQ(flip_labels(b, 0.0, 1).labels, b.labels);
    const auto f = flip_labels(b, 0.5, 1);
    std::size_t differ = 0;
    for (std::size_t i = 0; i < 100; ++i) differ += f.labels[i] != b.labels[i];
    EXPECT_EQ(differ, 50u);
    EXPECT_EQ(flip_labels(b, 0.5, 1).labels, f.labels);

    DataBatch multi = b;
    multi.num_classes = 5;
    for (int i = 0; i < 100; ++i) multi.labels[static_cast<std::size_t>(i)] = i % 5;
    const auto g = flip_labels(multi, 0.37, 3);
    std::size_t moved = 0;
    for (std::size_t i = 0; i < 100; ++i) {
        moved += g.labels[i] != multi.labels[i];
        EXPECT_GE(g.labels[i], 0);
        EXPECT_LT(g.labels[i], 5);
    }
    EXPECT_EQ(moved, 37u);

    DataBatch single = b;
    single.num_classes = 1;
    single.labels.assign(100, 0);
    EXPECT_THROW(flip_labels(single, 0.1, 1), TracerError);
    EXPECT_THROW(flip_labels(b, 1.0, 1), TracerError);
}

TEST(Config, ParsesAndRoundTrips) {
    const auto cfg = config_at("/tmp/x");
    EXPECT_EQ(cfg.optimizer.name, "sgd");
    EXPECT_EQ(cfg.seeds.size(), 2u);
    const auto again = parse_config(to_json(cfg));
    EXPECT_EQ(to_json(again), to_json(cfg));
}

TEST(Config, StrictAboutKeysAndTracerFields) {
    EXPECT_THROW(config_at("/tmp/x", {{"epoch", 3}}), TracerError);
    EXPECT_THROW(config_at("/tmp/x", {{"dataset", {{"flip_fraction", 1.0}}}}), TracerError);
    EXPECT_THROW(config_at("/tmp/x", {{"batch_size", 0}}), TracerError);
    EXPECT_THROW(config_at("/tmp/x", {{"schema_version", 2}}), TracerError);
    EXPECT_THROW(config_at("/tmp/x", {{"optimizer", {{"name", "sgd_tracer"}, {"rho", 0.1}, {"beta", 0.9}}}}),
                 TracerError);
    EXPECT_THROW(config_at("/tmp/x", {{"optimizer", {{"name", "sgd_tracer"}, {"beta", 0.9}, {"delta", 1e-3}}}}),
                 TracerError);
    EXPECT_THROW(config_at("/tmp/x", {{"optimizer", {{"name", "sam"}}}}), TracerError);
    EXPECT_THROW(config_at("/tmp/x", {{"optimizer", {{"name", "sgd_tracer"}, {"rho", 0.1}, {"beta", 0.9},
                                                      {"delta", "big"}}}}),
                 TracerError);
    const auto ok = config_at("/tmp/x", {{"optimizer", {{"name", "sgd_tracer"}, {"rho", 0.1}, {"beta", 0.9},
                                                         {"delta", "auto"}}}});
    EXPECT_FALSE(ok.optimizer.delta.has_value());
    EXPECT_THROW(config_at("/tmp/x", {{"dataset", {{"name", "cifar"}}}}), TracerError);
}

TEST(Config, SweepParameters) {
    const auto cfg = config_at("/tmp/x");
    for (const char* p : {"rho", "rho_sam", "lr", "beta", "delta"}) EXPECT_TRUE(is_sweep_parameter(p));
    EXPECT_FALSE(is_sweep_parameter("epochs"));
    EXPECT_EQ(with_parameter(cfg, "lr", 0.3).optimizer.schedule.base, 0.3);
    EXPECT_EQ(*with_parameter(cfg, "delta", 0.5).optimizer.delta, 0.5);
}

TEST(Metrics, CsvRoundTripIsExact) {
    const auto dir = scratch("metrics");
    std::vector<MetricsRow> rows(2);
    rows[0].step = 10;
    rows[0].epoch = 1;
    rows[0].train_loss = 0.1 + 0.2;
    rows[0].test_accuracy = 1.0 / 3.0;
    rows[1].step = 20;
    rows[1].epoch = 2;
    rows[1].train_loss = 1e-300;
    rows[1].val_accuracy = 0.5;
    write_metrics_csv(dir / "m.csv", rows);
    const auto back = read_metrics_csv(dir / "m.csv");
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[0].train_loss, rows[0].train_loss);
    EXPECT_EQ(*back[0].test_accuracy, *rows[0].test_accuracy);
    EXPECT_FALSE(back[0].val_accuracy.has_value());
    EXPECT_EQ(back[1].train_loss, 1e-300);
    EXPECT_EQ(slurp(dir / "m.csv").substr(0, std::string(kMetricsHeader).size()), kMetricsHeader);
}

TEST(Metrics, RejectsNonFiniteAndUnorderedRows) {
    const auto dir = scratch("metrics_bad");
    std::vector<MetricsRow> rows(2);
    rows[0].step = 5;
    rows[1].step = 5;
    EXPECT_THROW(write_metrics_csv(dir / "m.csv", rows), TracerError);
    rows[1].step = 6;
    rows[1].grad_norm = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(write_metrics_csv(dir / "m.csv", rows), TracerError);
}

TEST(Metrics, MeanStdErr) {
    const auto m = mean_std_error({1.0, 2.0, 3.0, 4.0});
    EXPECT_DOUBLE_EQ(m.mean, 2.5);
    EXPECT_NEAR(m.std_error, std::sqrt(5.0 / 3.0) / 2.0, 1e-15);
    EXPECT_EQ(m.n, 4u);
    EXPECT_EQ(mean_std_error({7.0}).std_error, 0.0);
}

TEST(Checkpoint, RoundTripAndLengthCheck) {
    const auto dir = scratch("ckpt");
    Vector w(4);
    w << 1.0, -0.0, 1e-310, std::nextafter(1.0, 2.0);
    write_checkpoint(dir / "c.bin", w, {{"seed", 3}});
    const auto c = read_checkpoint(dir / "c.bin");
    EXPECT_EQ(c.params, w);
    EXPECT_EQ(c.sidecar.at("p"), 4);
    EXPECT_EQ(c.sidecar.at("seed"), 3);
    EXPECT_EQ(fs::file_size(dir / "c.bin"), 32u);
    const std::string raw = slurp(dir / "c.bin");
    EXPECT_EQ(static_cast<unsigned char>(raw[7]), 0x3F);
    EXPECT_EQ(static_cast<unsigned char>(raw[6]), 0xF0);
    std::ofstream(dir / "c.bin", std::ios::app) << "x";
    EXPECT_THROW(read_checkpoint(dir / "c.bin"), TracerError);
}

TEST(Run, RhoZeroTracerWritesIdenticalMetricsToSgd) {
    const auto dir = scratch("reduction");
    run(config_at(dir / "sgd"));
    run(config_at(dir / "tr", {{"optimizer", {{"name", "sgd_tracer"}, {"rho", 0.0}, {"beta", 0.999}, {"delta", 1e-3}}}}));
    for (const char* seed : {"seed_1", "seed_2"}) {
        EXPECT_EQ(slurp(dir / "sgd" / seed / "metrics.csv"), slurp(dir / "tr" / seed / "metrics.csv"));
        EXPECT_EQ(slurp(dir / "sgd" / seed / "checkpoint.bin"), slurp(dir / "tr" / seed / "checkpoint.bin"));
    }
}

TEST(Run, RepeatedRunsAreByteIdentical) {
    const auto dir = scratch("determinism");
    const json patch = {{"optimizer", {{"name", "adam_tracer"}, {"lr", 0.01}, {"rho", 1e-3}, {"beta", 0.9}, {"delta", "auto"}}}};
    run(config_at(dir / "a", patch));
    run(config_at(dir / "b", patch));
    EXPECT_EQ(slurp(dir / "a" / "seed_2" / "metrics.csv"), slurp(dir / "b" / "seed_2" / "metrics.csv"));
    EXPECT_EQ(slurp(dir / "a" / "summary.json"), slurp(dir / "b" / "summary.json"));
}

TEST(Run, QuadraticConvergesWithSgd) {
    const auto dir = scratch("quadratic");
    const auto cfg = config_at(dir, {{"model", {{"kind", "quadratic"}, {"diag", {1.0, 2.0, 0.5}}, {"b", {1.0, -1.0, 2.0}}, {"c", 0.0}, {"hidden", nullptr}, {"activation", nullptr}}},
                                     {"optimizer", {{"schedule", "constant"}, {"lr", 0.2}}},
                                     {"epochs", 30},
                                     {"seeds", {1}}});
    const auto s = run(cfg);
    ASSERT_TRUE(s.all_ok);
    const auto rows = read_metrics_csv(dir / "seed_1" / "metrics.csv");
    const auto ck = read_checkpoint(dir / "seed_1" / "checkpoint.bin");
    const auto m = QuadraticModel::diagonal(Vector((Vector(3) << 1.0, 2.0, 0.5).finished()), (Vector(3) << 1.0, -1.0, 2.0).finished());
    EXPECT_LE(m.gradient(ck.params).norm(), 1e-6);
    EXPECT_LE(rows.back().grad_norm, 1e-6);
    EXPECT_FALSE(rows.back().test_accuracy.has_value());
}

TEST(Run, SummaryStatisticsMatchRecomputationFromCsvs) {
    const auto dir = scratch("summary");
    const auto cfg = config_at(dir, {{"seeds", {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}}, {"epochs", 2}});
    const auto s = run(cfg);
    std::vector<double> acc;
    for (int seed = 1; seed <= 10; ++seed) {
        acc.push_back(*read_metrics_csv(dir / ("seed_" + std::to_string(seed)) / "metrics.csv").back().test_accuracy);
    }
    double mean = 0.0;
    for (double a : acc) mean += a;
    mean /= 10.0;
    double ss = 0.0;
    for (double a : acc) ss += (a - mean) * (a - mean);
    const json summary = json::parse(slurp(dir / "summary.json"));
    EXPECT_EQ(summary.at("schema_version"), kSchemaVersion);
    EXPECT_EQ(summary.at("final_test_accuracy").at("n"), 10);
    EXPECT_NEAR(summary.at("final_test_accuracy").at("mean").get<double>(), mean, 1e-15);
    EXPECT_NEAR(summary.at("final_test_accuracy").at("std_error").get<double>(), std::sqrt(ss / 9.0) / std::sqrt(10.0),
                1e-15);
    EXPECT_TRUE(fs::exists(dir / "config.json"));
    EXPECT_TRUE(fs::exists(dir / "seed_3" / "timing.csv"));
    EXPECT_TRUE(fs::exists(dir / "seed_3" / "checkpoint.bin.json"));
}

TEST(Run, DivergenceIsFlaggedNotAveraged) {
    const auto dir = scratch("diverge");
    const auto s = run(config_at(dir, {{"optimizer", {{"lr", 1e300}, {"schedule", "constant"}}}}));
    EXPECT_FALSE(s.all_ok);
    EXPECT_EQ(s.json.at("n_failed"), 2);
    EXPECT_FALSE(s.json.contains("final_test_accuracy"));
    EXPECT_EQ(s.json.at("runs").at(0).at("status"), "failed");
    const auto csv = slurp(dir / "seed_1" / "metrics.csv");
    EXPECT_EQ(csv.find("nan"), std::string::npos);
    EXPECT_EQ(csv.find("inf"), std::string::npos);
}

TEST(Sweep, SingletonEqualsRunAndEmptyListFails) {
    const auto dir = scratch("sweep");
    const auto cfg = config_at(dir / "sweep", {{"optimizer", {{"name", "sgd_tracer"}, {"rho", 0.5}, {"beta", 0.9}, {"delta", 1e-2}}}});
    const auto rows = sweep(cfg, "rho", {1e-3});
    ASSERT_EQ(rows.size(), 1u);
    run(with_parameter(config_at(dir / "direct", {{"optimizer", {{"name", "sgd_tracer"}, {"rho", 0.5}, {"beta", 0.9}, {"delta", 1e-2}}}}),
                       "rho", 1e-3));
    EXPECT_EQ(slurp(fs::path(rows[0].directory) / "seed_1" / "metrics.csv"), slurp(dir / "direct" / "seed_1" / "metrics.csv"));
    const auto table = slurp(dir / "sweep" / "sweep.csv");
    EXPECT_EQ(table.substr(0, table.find('\n')),
              "value,mean_test_accuracy,stderr_test_accuracy,mean_val_accuracy,stderr_val_accuracy,n,failed");
    EXPECT_THROW(sweep(cfg, "rho", {}), TracerError);
    EXPECT_THROW(sweep(cfg, "epochs", {1.0}), TracerError);
}

TEST(Sweep, RhoZeroRowEqualsSgdBaseline) {
    const auto dir = scratch("sweep_zero");
    const auto tr = config_at(dir / "sweep", {{"optimizer", {{"name", "sgd_tracer"}, {"rho", 0.1}, {"beta", 0.9}, {"delta", 1e-2}}}});
    const auto rows = sweep(tr, "rho", {0.0, 1e-4});
    const auto base = run(config_at(dir / "sgd"));
    EXPECT_EQ(rows[0].test_accuracy.mean, base.json.at("final_test_accuracy").at("mean").get<double>());
}

TEST(Compare, JointTable) {
    const auto dir = scratch("compare");
    run(config_at(dir / "a"));
    run(config_at(dir / "b", {{"optimizer", {{"name", "sam"}, {"rho_sam", 0.05}}}}));
    const auto table = compare({(dir / "a").string(), (dir / "b").string()});
    EXPECT_NE(table.find(",sgd,"), std::string::npos);
    EXPECT_NE(table.find(",sam,"), std::string::npos);
    EXPECT_THROW(compare({(dir / "missing").string()}), TracerError);
}

TEST(Diagnose, ProducesGeometryRecord) {
    const auto dir = scratch("diagnose");
    const auto cfg = config_at(dir, {{"model", {{"kind", "logistic"}, {"hidden", nullptr}, {"activation", nullptr}}}, {"seeds", {1}}});
    run(cfg);
    DiagnoseOptions opts;
    opts.probes = 20;
    opts.directions = 50;
    const auto j = diagnose(cfg, (dir / "seed_1" / "checkpoint.bin").string(), opts);
    EXPECT_EQ(j.at("mode_id"), "seed_1");
    EXPECT_GT(j.at("hessian_trace").at("estimate").get<double>(), 0.0);
    EXPECT_TRUE(j.contains("log_Z"));
    EXPECT_EQ(j.at("profile").at("rows").size(), opts.radii.size());
}

TEST(Sweep, AbsurdlyLargeRhoFallsToChance) {
    const auto dir = scratch("sweep_large");
    const auto cfg = config_at(dir, {{"dataset", {{"n_train", 300}, {"n_val", 100}, {"n_test", 300}, {"noise", 0.25}}},
                                     {"model", {{"hidden", {16}}}},
                                     {"epochs", 20},
                                     {"batch_size", 32},
                                     {"seeds", {1, 2, 3}},
                                     {"optimizer", {{"name", "sgd_tracer"}, {"momentum", 0.9}, {"rho", 0.0},
                                                    {"beta", 0.99}, {"delta", 0.1}}}});
    const auto rows = sweep(cfg, "rho", {0.0, 0.1, 10.0});
    ASSERT_EQ(rows.size(), 3u);
    for (const auto& r : rows) EXPECT_EQ(r.failed, 0u);
    EXPECT_GT(rows[0].test_accuracy.mean, 0.8);
    EXPECT_GE(rows[0].test_accuracy.mean, rows[1].test_accuracy.mean - 0.05);
    EXPECT_LT(rows[2].test_accuracy.mean, 0.6);
}
