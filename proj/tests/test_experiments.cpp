#include <cmath>

#include <gtest/gtest.h>

#include "capillary1d/acceptance.hpp"
#include "capillary1d/experiments.hpp"
#include "capillary1d/io.hpp"

using namespace capillary1d;

namespace {

SimulationConfig small_config() {
    SimulationConfig c;
    c.domain = DomainSpec{1.0, 8, 8};
    c.integrator.t_end = 0.005;
    c.snapshot_count = 4;
    c.initial_data = {"cosine_bump", {{"base", 0.5}, {"amplitude", 0.5}}};
    c.diagnostics.holder_probe = false;
    return c;
}

}  // namespace

TEST(SweepSpec, Validation) {
    SweepSpec s;
    s.base = small_config();
    s.values = {0.3, 0.1};
    EXPECT_THROW(s.validate(), ValidationError);
    s.values = {0.3, 0.1, 0.2};
    EXPECT_THROW(s.validate(), ValidationError);
    s.values = {0.3, 0.3, 0.1};
    EXPECT_THROW(s.validate(), ValidationError);
    s.values = {0.3, 0.1, 0.03};
    EXPECT_NO_THROW(s.validate());
    s.values = {0.01, 0.1, 1.0};
    EXPECT_NO_THROW(s.validate());
    s.parameter = SweepParameter::N;
    s.values = {8, 12.5, 16};
    EXPECT_THROW(s.validate(), ValidationError);
    s.values = {8, 12, 16};
    EXPECT_NO_THROW(s.validate());
    EXPECT_EQ(s.member_config(12).domain.modes, 12);
    EXPECT_EQ(s.member_config(12).integrator.snapshot_times, s.base.snapshot_times());
}

TEST(SweepSpec, ParameterNames) {
    for (auto p : {SweepParameter::eta, SweepParameter::epsilon, SweepParameter::delta, SweepParameter::N})
        EXPECT_EQ(sweep_parameter_from_string(to_string(p)), p);
    EXPECT_THROW(sweep_parameter_from_string("gamma"), ValidationError);
}

TEST(Plateau, BoundedRatio) {
    EXPECT_TRUE(detail::plateau("q", {9.0, 1.0, 1.5, 2.0}).bounded);
    EXPECT_FALSE(detail::plateau("q", {1.0, 2.0, 4.1}).bounded);
    EXPECT_TRUE(detail::plateau("q", {0.0, 0.0, 0.0}).bounded);
    EXPECT_FALSE(detail::plateau("q", {0.0, 1.0, 1.0}).bounded);
    EXPECT_FALSE(detail::plateau("q", {1.0, 1.0}).bounded);
    EXPECT_EQ(detail::plateau("q", {5.0, 1.0, 2.0, 3.0}).tail.size(), 3u);
}

TEST(TrajectoryDifference, PaddingAndTrapezoid) {
    const std::vector<double> t = {0.0, 1.0, 3.0};
    Vector a(2), b(3);
    a << 1.0, 0.0;
    b << 1.0, 0.0, 2.0;
    // |a - b| = 2 at every time, so the L2-in-time norm is 2 sqrt(3).
    const std::vector<SpectralField> ta(3, SpectralField(a)), tb(3, SpectralField(b));
    EXPECT_NEAR(trajectory_l2_difference(t, ta, tb), 2.0 * std::sqrt(3.0), 1e-14);
    EXPECT_EQ(trajectory_l2_difference(t, ta, ta), 0.0);
}

TEST(Sweep, DeterministicAcrossThreadCounts) {
    SweepSpec s;
    s.base = small_config();
    s.parameter = SweepParameter::delta;
    s.values = {0.3, 0.1, 0.03};
    const SweepReport one = run_sweep(s, 1);
    const SweepReport two = run_sweep(s, 2);
    ASSERT_TRUE(one.complete);
    EXPECT_EQ(one.members.size(), 3u);
    EXPECT_EQ(to_json(one).dump(), to_json(two).dump());
    for (const auto& m : one.members) {
        EXPECT_LE(m.mass_drift, 1e-12);
        EXPECT_LT(m.y_max, 1.0);
    }
    EXPECT_EQ(one.cauchy.size(), 2u);
}

TEST(Sweep, FailingMemberTruncatesReport) {
    SweepSpec s;
    s.base = small_config();
    s.parameter = SweepParameter::eta;
    s.values = {0.5, 0.0, -1.0};
    const SweepReport rep = run_sweep(s, 1);
    EXPECT_FALSE(rep.complete);
    EXPECT_EQ(rep.members.size(), 2u);
    EXPECT_NE(rep.error.find("eta"), std::string::npos);
}

TEST(CoreStatistic, KnownValuesAndDegenerateCases) {
    Vector u(4), v(4), w(4);
    u << 1.0, 1.0, 0.05, 1.0;
    v << 1.0, 3.0, 100.0, 2.0;
    w << 1.0, 1.0, 1.0, 2.0;
    // core set excludes the third point; weighted mean 2, weighted variance 0.5
    const CoreStatistic s = core_statistic(u, v, w);
    EXPECT_NEAR(s.mean, 2.0, 1e-15);
    EXPECT_NEAR(s.cov, std::sqrt(0.5) / 2.0, 1e-15);
    EXPECT_FALSE(s.degenerate);

    const CoreStatistic flat = core_statistic(u, Vector::Zero(4), w);
    EXPECT_TRUE(flat.degenerate);
    EXPECT_TRUE(std::isnan(flat.cov));

    EXPECT_THROW(core_statistic(Vector::Constant(4, -1.0), v, w), ValidationError);
}

TEST(ProfileStudy, FlatFilmIsDegenerate) {
    SimulationConfig c = small_config();
    c.initial_data = {"constant", {{"value", 0.7}}};
    const ProfileReport rep = curvature_profile_study(c, 2);
    EXPECT_TRUE(rep.degenerate);
    EXPECT_FALSE(rep.curvature_equilibrates);
}

TEST(ThresholdStudy, SkipsInvalidExponent) {
    SimulationConfig c = small_config();
    const ThresholdReport rep = threshold_study({0.5, 2.0}, c, 2);
    ASSERT_EQ(rep.rows.size(), 2u);
    EXPECT_TRUE(rep.rows[0].skipped);
    EXPECT_FALSE(rep.rows[0].reason.empty());
    EXPECT_FALSE(rep.rows[1].skipped);
    EXPECT_TRUE(std::isfinite(rep.rows[1].initial_entropy));
    EXPECT_TRUE(rep.rows[1].positivity.nonnegative);
    EXPECT_THROW(threshold_study({}, c), ValidationError);
}

TEST(MassCheck, DetectsInjectedLeak) {
    RunOutput run = run_simulation(small_config());
    acceptance::Context clean;
    clean.runs.push_back({"clean", run.verdicts.mass_drift, 0.0});
    EXPECT_TRUE(acceptance::mass_conservation(clean).passed);

    // Leak mass through the zero mode of the last snapshot and rebuild the record.
    Snapshot& last = run.result.snapshots.back();
    last.c.coeffs[0] *= 1.0 + 1e-6;
    const SpectralBasis basis(run.config.domain);
    const DiagnosticsRecord leaked = snapshot_diagnostics(last, run.config.model, nullptr, basis, {});
    const double m0 = run.records.front().mass;
    acceptance::Context dirty;
    dirty.runs.push_back({"leaky", std::abs(leaked.mass - m0) / std::abs(m0), 0.0});
    EXPECT_FALSE(acceptance::mass_conservation(dirty).passed);
}
