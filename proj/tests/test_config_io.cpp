#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "capillary1d/config.hpp"
#include "capillary1d/format.hpp"
#include "capillary1d/io.hpp"
#include "capillary1d/runner.hpp"
#include "test_support.hpp"

using namespace capillary1d;

TEST(Config, DefaultsFromEmptyObject) {
    const SimulationConfig c = config_from_json(json::object());
    EXPECT_EQ(c.domain.modes, DomainSpec{}.modes);
    EXPECT_EQ(c.model.n, ModelParams{}.n);
    EXPECT_FALSE(c.model.entropy_anchor.has_value());
    EXPECT_EQ(c.snapshot_times().size(), 11u);
    EXPECT_EQ(c.snapshot_times().back(), c.integrator.t_end);
}

TEST(Config, ParsesFields) {
    const json j = json::parse(R"({
        "domain": {"l": 2.0, "N": 24},
        "model": {"n": 1.5, "delta": 0.03, "epsilon": 0.01, "eta": 0.2, "pressure_mode": "linear",
                  "entropy_anchor": 3.0},
        "integrator": {"T": 0.5, "snapshots": [0.0, 0.25, 0.5]},
        "diagnostics": {"tol_zero": "auto", "tol_neg": 1e-9}
    })");
    const SimulationConfig c = config_from_json(j);
    EXPECT_EQ(c.domain.half_length, 2.0);
    EXPECT_EQ(c.domain.modes, 24);
    EXPECT_EQ(c.model.n, 1.5);
    EXPECT_EQ(c.model.pressure_mode, PressureMode::linear);
    EXPECT_EQ(c.model.entropy_anchor.value(), 3.0);
    EXPECT_EQ(c.integrator.t_end, 0.5);
    EXPECT_EQ(c.snapshot_times(), (std::vector<double>{0.0, 0.25, 0.5}));
    EXPECT_FALSE(c.diagnostics.tol_zero.has_value());
    EXPECT_EQ(c.diagnostics.tol_neg.value(), 1e-9);
}

TEST(Config, RejectsBadInput) {
    EXPECT_THROW(config_from_json(json::array()), ValidationError);
    EXPECT_THROW(config_from_json(json::parse(R"({"schema_version": 2})")), ValidationError);
    EXPECT_THROW(config_from_json(json::parse(R"({"model": {"n": 0.5}})")), ValidationError);
    EXPECT_THROW(config_from_json(json::parse(R"({"model": {"delta": "big"}})")), ValidationError);
    EXPECT_THROW(config_from_json(json::parse(R"({"model": {"pressure_mode": "cubic"}})")), ValidationError);
    EXPECT_THROW(config_from_json(json::parse(R"({"domain": {"N": 0}})")), ValidationError);
    EXPECT_THROW(config_from_json(json::parse(R"({"integrator": {"T": 1, "snapshots": [2.0]}})")), ValidationError);
    EXPECT_THROW(config_from_json(json::parse(R"({"integrator": {"snapshots": 0}})")), ValidationError);
    EXPECT_THROW(config_from_json(json::parse(R"({"diagnostics": {"tol_zero": "manual"}})")), ValidationError);
    EXPECT_THROW(load_json_file("/nonexistent/config.json"), ValidationError);
}

TEST(Config, RoundTrip) {
    SimulationConfig c;
    c.domain.modes = 20;
    c.model.eta = 0.25;
    c.model.entropy_anchor = 2.5;
    c.diagnostics.tol_zero = 1e-6;
    c.initial_data = {"droplet", {{"width", 0.3}}};
    const json j = config_to_json(c);
    EXPECT_EQ(config_to_json(config_from_json(j)), j);

    c.integrator.snapshot_times = {0.0, 0.5, 1.0};
    c.snapshot_count.reset();
    const json k = config_to_json(c);
    EXPECT_EQ(config_from_json(k).snapshot_times(), c.integrator.snapshot_times);
}

TEST(Config, FileOnDisk) {
    const auto path = std::filesystem::temp_directory_path() / "capillary1d_config_test.json";
    std::ofstream(path) << R"({"domain": {"N": 12}})";
    EXPECT_EQ(config_from_json(load_json_file(path.string())).domain.modes, 12);
    std::ofstream(path) << "{not json";
    EXPECT_THROW(load_json_file(path.string()), ValidationError);
    std::filesystem::remove(path);
}

TEST(Override, DottedPaths) {
    json j = json::object();
    apply_override(j, "model.delta=0.03");
    apply_override(j, "integrator.method=rk4");
    apply_override(j, "integrator.snapshots=[0,0.5,1]");
    apply_override(j, "output.directory=run one");
    EXPECT_EQ(j["model"]["delta"].get<double>(), 0.03);
    EXPECT_EQ(j["integrator"]["method"].get<std::string>(), "rk4");
    EXPECT_EQ(j["integrator"]["snapshots"].size(), 3u);
    EXPECT_EQ(j["output"]["directory"].get<std::string>(), "run one");
    apply_override(j, "model.delta=0.1");
    EXPECT_EQ(j["model"]["delta"].get<double>(), 0.1);
    EXPECT_THROW(apply_override(j, "model.delta"), ValidationError);
    EXPECT_THROW(apply_override(j, "=3"), ValidationError);
}

TEST(InitialData, Kinds) {
    const SpectralBasis b(DomainSpec{1.0, 16, 8});
    const SpectralField flat = initial_coefficients({"constant", {{"value", 0.7}}}, b);
    EXPECT_NEAR(flat.coeffs[0], 0.7 * std::sqrt(2.0), 1e-14);
    for (int j = 1; j <= 16; ++j) EXPECT_NEAR(flat.coeffs[j], 0.0, 1e-14);

    const auto bump = initial_profile({"cosine_bump", {{"base", 0.2}, {"amplitude", 1.0}}}, 1.0);
    EXPECT_NEAR(bump(0.0), 1.2, 1e-15);
    EXPECT_NEAR(bump(1.0), 0.2, 1e-15);

    const auto drop = initial_profile({"droplet", {{"amplitude", 0.5}, {"width", 0.25}, {"floor", 1e-6}}}, 1.0);
    EXPECT_NEAR(drop(0.0), 0.5 + 1e-6, 1e-15);
    EXPECT_LT(drop(1.0), 1e-6 + 1e-6);

    const SpectralField given = initial_coefficients({"coeffs", {{"values", {1.0, 0.5, 0.25}}}}, b);
    EXPECT_EQ(given.coeffs[1], 0.5);
    EXPECT_EQ(given.coeffs[3], 0.0);

    EXPECT_THROW(initial_coefficients({"coeffs", json::object()}, b), ValidationError);
    EXPECT_THROW(initial_profile({"spiral", json::object()}, 1.0), ValidationError);
    EXPECT_THROW(initial_profile({"droplet", {{"width", 0.0}}}, 1.0), ValidationError);
    EXPECT_THROW(initial_profile({"constant", {{"value", "one"}}}, 1.0), ValidationError);
}

TEST(Format, RoundTripsDoubles) {
    auto gen = test_support::rng();
    std::uniform_real_distribution<double> mant(-1.0, 1.0);
    std::uniform_int_distribution<int> expo(-300, 300);
    for (int k = 0; k < 1000; ++k) {
        const double v = std::ldexp(mant(gen), expo(gen));
        EXPECT_EQ(std::strtod(format_double(v).c_str(), nullptr), v);
    }
    EXPECT_EQ(format_double(std::nan("")), "nan");
    EXPECT_EQ(format_double(-HUGE_VAL), "-inf");
    EXPECT_EQ(format_double(0.1), "0.10000000000000001");
}

TEST(Output, SeriesAndSnapshotFiles) {
    EXPECT_STREQ(kSeriesHeader,
                 "t,mass,energy_surface,energy_delta,dissipation_cum,entropy,entropy_dissipation_cum,min_u,max_u,"
                 "zero_frac,y_max,h1,h2,weak_residual");
    SimulationConfig c;
    c.domain = DomainSpec{1.0, 8, 8};
    c.integrator.t_end = 0.01;
    c.snapshot_count = 2;
    c.initial_data = {"constant", {{"value", 0.7}}};
    const RunOutput run = run_simulation(c);
    const std::string series = series_csv(run.records);
    std::istringstream in(series);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, kSeriesHeader);
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        EXPECT_EQ(std::count(line.begin(), line.end(), ','), 13);
    }
    EXPECT_EQ(rows, 3);
    EXPECT_EQ(series.find('\r'), std::string::npos);

    const auto dir = std::filesystem::temp_directory_path() / "capillary1d_io_test";
    std::filesystem::remove_all(dir);
    write_simulation(dir, run, 0.0);
    for (const char* f : {"series.csv", "snap_0.csv", "snap_2.csv", "summary.json"})
        EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
    const json summary = load_json_file((dir / "summary.json").string());
    EXPECT_EQ(config_from_json(summary.at("config")).domain.modes, 8);
    std::filesystem::remove_all(dir);
}
