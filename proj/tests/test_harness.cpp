#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mbhoming/experiment.hpp"

using namespace mbhoming;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("mbhoming_test_" + name);
    fs::remove_all(p);
    return p;
}

// A small, fast pipeline: 64x32 renders onto a 16x8 thumbnail.
VisualPipeline small_pipeline(std::uint64_t seed = 1) {
    return VisualPipeline({64, 32, -35.0, 70.0, 0.0}, {16, 8, 1.0}, {400, 8, 8, false}, seed);
}

TrialRecord straight_line(Vec2 nest, std::initializer_list<double> dists) {
    TrialRecord t;
    double time = 0;
    for (const double d : dists) {
        TrialStep s;
        s.t = time;
        s.x = nest.x + d;
        s.y = nest.y;
        s.cmd.speed = 0.5;
        t.trajectory.push_back(s);
        time += 0.125;
    }
    return t;
}

} // namespace

TEST(Format, ExactIsShortestRoundTrip) {
    EXPECT_EQ(fmt_exact(0.1), "0.1");
    EXPECT_EQ(fmt_exact(deg_to_rad(5.0)), "0.08726646259971647");
    for (const double v : {1.0 / 3.0, 6.02e23, -1e-300, 352.5}) EXPECT_EQ(std::stod(fmt_exact(v)), v);
}

TEST(Format, FixedCollapsesNegativeZeroAndNan) {
    EXPECT_EQ(fmt_fixed(-0.0000001, 3), "0.000");
    EXPECT_EQ(fmt_fixed(-1.25, 1), "-1.2");
    EXPECT_EQ(fmt_fixed(std::nan(""), 2), "nan");
    EXPECT_EQ(fmt_fixed(-std::nan(""), 2), "nan");
}

TEST(CsvTable, RowsWrapAtTheColumnCount) {
    Csv c{"a", "b", "c"};
    c << 1 << 2.5 << "x" << std::size_t{4} << true << std::string_view("y");
    EXPECT_EQ(c.str(), "a,b,c\n1,2.500000,x\n4,1,y\n");
    EXPECT_EQ(c.rows(), 2u);
    Csv d{"v"};
    d.set_decimals(2) << 3.14159;
    EXPECT_EQ(d.str(), "v\n3.14\n");
}

TEST(Io, AtomicWriteLeavesNoTemporary) {
    const auto dir = scratch_dir("io");
    write_file_atomic(dir / "sub" / "f.txt", std::string_view("hello"));
    EXPECT_TRUE(fs::exists(dir / "sub" / "f.txt"));
    EXPECT_FALSE(fs::exists(dir / "sub" / "f.txt.tmp"));
    const auto bytes = read_file_bytes(dir / "sub" / "f.txt");
    EXPECT_EQ(std::string(bytes.begin(), bytes.end()), "hello");
    write_file_atomic(dir / "sub" / "f.txt", std::string_view("again"));
    const auto again = read_file_bytes(dir / "sub" / "f.txt");
    EXPECT_EQ(std::string(again.begin(), again.end()), "again");
    EXPECT_THROW(read_file_bytes(dir / "missing"), IoError);
    fs::remove_all(dir);
}

TEST(Config, EveryExperimentRoundTrips) {
    for (const auto id : {ExperimentId::Sim, ExperimentId::Exp1, ExperimentId::Exp2, ExperimentId::Exp3}) {
        RunConfig c = RunConfig::defaults(id);
        c.seeds = {7, 8, 9};
        c.noise.heading_sigma = deg_to_rad(5.0);
        const auto text = config_to_string(c);
        const auto back = config_from_string(text);
        EXPECT_EQ(config_to_string(back), text) << to_string(id);
        EXPECT_EQ(back.experiment, id);
        EXPECT_EQ(back.walk, c.walk);
        EXPECT_EQ(back.sweep, c.sweep);
    }
}

TEST(Config, OverridesKeepExperimentDefaults) {
    const auto c = config_from_string("mbhoming-config 1\nexperiment exp3\nseed.noise 5 # comment\n\n");
    EXPECT_EQ(c.seeds.noise, 5u);
    EXPECT_EQ(c.mode, ControlMode::FiveMBON);
    const auto f = config_from_string("mbhoming-config 1\n", ExperimentId::Exp2);
    EXPECT_EQ(f.experiment, ExperimentId::Exp2);
}

TEST(Config, ErrorsNameTheLine) {
    try {
        config_from_string("mbhoming-config 1\nseed.world 1\nnot.a.key 3\n");
        FAIL();
    } catch (const FormatError& e) {
        EXPECT_EQ(e.offset(), 3u);
    }
    EXPECT_THROW(config_from_string("mbhoming-config 2\n"), FormatError);
    EXPECT_THROW(config_from_string("mbhoming-config 1\nseed.world banana\n"), FormatError);
    EXPECT_THROW(config_from_string("mbhoming-config 1\nwalk.speed -1\n"), Error);
}

TEST(Grid, NodeCountAndCentring) {
    const World w = generate_world(1);
    const auto g = grid_sample(w, 1.0, 1.0, 4);
    ASSERT_EQ(g.nodes.size(), 4u);
    double sx = 0, sy = 0;
    for (const auto& p : g.nodes) {
        sx += p.x;
        sy += p.y;
    }
    EXPECT_NEAR(sx, 0.0, 1e-12);
    EXPECT_NEAR(sy, 0.0, 1e-12);
    EXPECT_EQ(grid_sample(w, 5.0, 0.2, 36).nodes.size(), 26u * 26u);
    EXPECT_THROW(grid_sample(w, 1.0, 1.0, 0), ConfigError);
    EXPECT_THROW(grid_sample(w, 1.0, 0.0, 4), ConfigError);
}

TEST(Bearing, SyntheticSineCrossingRecoversTheTarget) {
    const std::size_t n = 72;
    for (const double target : {0.3, 2.0, -2.7, 3.1}) {
        std::vector<double> e(n), c(n, 0.5);
        for (std::size_t j = 0; j < n; ++j) e[j] = std::sin(kTwoPi * static_cast<double>(j) / n - target);
        const auto est = estimate_bearing_from_samples(e, c);
        EXPECT_EQ(est.status, BearingStatus::Crossing);
        EXPECT_LT(angle_distance(est.bearing, target), deg_to_rad(0.5)) << target;
    }
}

TEST(Bearing, PicksTheMostFamiliarCrossingOrFallsBack) {
    // Two upward crossings; the second has lower combined familiarity.
    std::vector<double> e{-1, 1, 1, -1, 1, 1, -1, -1};
    std::vector<double> c{0.9, 0.9, 0.9, 0.2, 0.2, 0.9, 0.9, 0.9};
    const auto est = estimate_bearing_from_samples(e, c);
    EXPECT_EQ(est.status, BearingStatus::Crossing);
    EXPECT_NEAR(est.bearing, wrap_angle(3.5 * kTwoPi / 8), 1e-12);
    std::vector<double> flat(8, 0.0), fam{0.5, 0.4, 0.3, 0.1, 0.6, 0.7, 0.8, 0.9};
    const auto fb = estimate_bearing_from_samples(flat, fam);
    EXPECT_EQ(fb.status, BearingStatus::Fallback);
    EXPECT_NEAR(fb.bearing, 3 * kTwoPi / 8, 1e-12);
    EXPECT_THROW(estimate_bearing_from_samples(std::vector<double>{}, std::vector<double>{}), InputError);
}

TEST(Bearing, UntrainedNetworkGivesNoEstimate) {
    const auto pipe = small_pipeline();
    const World w = generate_world(2);
    EXPECT_EQ(estimate_home_bearing(pipe, w, {1, 1}, 8).status, BearingStatus::NoEstimate);
}

TEST(Bearing, FanMatchesDirectRendering) {
    const auto pipe = small_pipeline();
    const World w = generate_world(3);
    const auto fan = orientation_fan(pipe, w, {0.5, -0.4}, 8);
    ASSERT_EQ(fan.size(), 8u);
    for (std::size_t j = 0; j < 8; ++j) {
        const auto direct = process(pipe.look(w, {0.5, -0.4}, kTwoPi * static_cast<double>(j) / 8), pipe.vision_config());
        for (std::size_t i = 0; i < direct.size(); ++i) ASSERT_NEAR(fan[j][i], direct[i], 1e-12);
    }
}

TEST(Trial, UntrainedBankDrivesStraightOut) {
    const auto pipe = small_pipeline();
    World w = generate_world(5);
    w.arena_half = 3.0;
    TrialLimits lim;
    lim.max_time = 30.0;
    const auto t = run_homing_trial(w, pipe, {1.0, 0.0}, 0.0, ControlMode::FiveMBON, lim);
    EXPECT_EQ(t.outcome, TrialOutcome::LeftArena);
    for (const auto& s : t.trajectory) {
        EXPECT_DOUBLE_EQ(s.error, 0.0);
        EXPECT_NEAR(s.y, 0.0, 1e-12);
        EXPECT_DOUBLE_EQ(s.cmd.speed, 0.8);
    }
    EXPECT_FALSE(t.stopped);
}

TEST(Trial, SummaryIsConsistentWithTrajectory) {
    const Vec2 nest{0, 0};
    auto t = straight_line(nest, {5, 3, 1.5, 0.5, 1.0, 2.5});
    TrialLimits lim;
    summarize_trial(t, nest, lim);
    EXPECT_TRUE(t.arrived);
    EXPECT_DOUBLE_EQ(t.min_dist_to_nest, 0.5);
    EXPECT_DOUBLE_EQ(t.mean_search_dist, (1.5 + 0.5 + 1.0 + 2.5) / 4);
    EXPECT_DOUBLE_EQ(t.max_search_dist, 2.5);
    EXPECT_DOUBLE_EQ(t.stop_dist, 2.5);
    EXPECT_TRUE(trial_homed(t, 3.0));
    EXPECT_FALSE(trial_homed(t, 2.0));
    const auto st = search_stats({t, t}, nest, lim.nest_radius);
    EXPECT_EQ(st.samples, 8u);
    EXPECT_DOUBLE_EQ(st.mean, t.mean_search_dist);
}

TEST(Trial, StopDetectionRequiresSpeedToStayZero) {
    TrialRecord t = straight_line({0, 0}, {1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1});
    for (std::size_t i = 2; i < t.trajectory.size(); ++i) t.trajectory[i].cmd.speed = 0.0;
    TrialLimits lim;
    summarize_trial(t, {0, 0}, lim);
    EXPECT_TRUE(t.stopped);
    EXPECT_TRUE(t.stayed_stopped);
    EXPECT_TRUE(trial_stopped_at_nest(t, 1.2));
    t.trajectory.back().cmd.speed = 0.01; // creeps again
    summarize_trial(t, {0, 0}, lim);
    EXPECT_FALSE(t.stayed_stopped);
}

TEST(Starts, SitOnTheConfiguredRings) {
    RunConfig c = RunConfig::defaults(ExperimentId::Exp1);
    const auto s = trial_starts(c, {1, 2});
    ASSERT_EQ(s.size(), 12u);
    for (std::size_t i = 0; i < s.size(); ++i) {
        EXPECT_NEAR((s[i].pos - Vec2{1, 2}).norm(), c.starts.radii[i % 2], 1e-12);
    }
    EXPECT_EQ(trial_starts(c, {1, 2})[5].heading, s[5].heading);
}

TEST(Purity, CountsOnlyLearnedViewsAwayFromTheAxis) {
    WalkLog log;
    auto row = [](double theta, TeachingSignal label, TeachingSignal truth, std::size_t dep) {
        WalkLogRow r;
        r.theta_n_true = theta;
        r.r_true = 3.0;
        r.label = label;
        r.truth = truth;
        r.depressed = dep;
        return r;
    };
    log.views = {row(1.0, TeachingSignal::Left, TeachingSignal::Left, 5),
                 row(-1.0, TeachingSignal::Left, TeachingSignal::Right, 5),
                 row(0.1, TeachingSignal::Right, TeachingSignal::Left, 5), // within 15 degrees
                 row(1.0, TeachingSignal::Right, TeachingSignal::Left, 0)}; // not learned
    const auto p = label_purity(log, 0.3);
    EXPECT_EQ(p.checked, 2u);
    EXPECT_EQ(p.agree, 1u);
    EXPECT_EQ(log.learned(), 3u);
    EXPECT_EQ(log.labelled(), 4u);
}

TEST(Sweep, AggregationMatchesHandStatistics) {
    std::vector<PositionError> rows(4);
    rows[0] = {0, {}, 0, 0, 10.0, BearingStatus::Crossing};
    rows[1] = {0, {}, 0, 0, 30.0, BearingStatus::Fallback};
    rows[2] = {0, {}, 0, 0, 0.0, BearingStatus::NoEstimate};
    rows[3] = {1, {}, 0, 0, 99.0, BearingStatus::Crossing};
    SweepCell cell;
    aggregate_cell(cell, rows, 0);
    EXPECT_EQ(cell.positions, 2u);
    EXPECT_EQ(cell.fallbacks, 1u);
    EXPECT_EQ(cell.no_estimate, 1u);
    EXPECT_DOUBLE_EQ(cell.mean_error_deg, 20.0);
    EXPECT_DOUBLE_EQ(cell.std_error_deg, 10.0);
    EXPECT_EQ(sweep_k(5000, 0.01), 50u);
    EXPECT_EQ(sweep_k(10, 0.01), 1u);
}

TEST(Walks, OrbitKeepsItsRadiusAndDirection) {
    OrbitWalk o;
    o.radius = {{0.0, 4.0}};
    o.duration = 10.0;
    const auto poses = walk_poses(o, {0, 0}, 0.125);
    ASSERT_EQ(poses.size(), 80u);
    for (const auto& p : poses) {
        EXPECT_NEAR(std::hypot(p.x, p.y), 4.0, 1e-9);
        // Counter-clockwise: nest on the left.
        EXPECT_EQ(teaching_signal(homing_vector(p, {0, 0})), TeachingSignal::Left);
    }
}

TEST(Walks, NoveltyCountingStopsOnRepeatedViews) {
    auto pipe = small_pipeline();
    const World w = generate_world(6);
    NestRotation rot;
    rot.views = 16;
    const auto first = run_learning_walk(w, rot, pipe, FixedLabel{TeachingSignal::Nest});
    EXPECT_EQ(first.labelled(), 16u);
    EXPECT_GT(first.learned(), 0u);
    const auto again = run_learning_walk(w, rot, pipe, FixedLabel{TeachingSignal::Nest});
    EXPECT_EQ(again.learned(), 0u);
}

TEST(Plots, ByteStableAndWellFormed) {
    const World w = generate_world(7);
    std::vector<TrialRecord> trials{straight_line(w.nest, {4, 3, 2, 1, 0.5, 1.5}), straight_line(w.nest, {6, 5, 4})};
    for (auto& t : trials) summarize_trial(t, w.nest, {});
    const auto a = trajectories_svg(trials, w, 1.0);
    EXPECT_EQ(a, trajectories_svg(trials, w, 1.0));
    EXPECT_EQ(a.rfind("<svg", 0), 0u);
    EXPECT_NE(a.find("</svg>"), std::string::npos);
    for (const auto& s : {search_polar_svg(trials, w, 1.0), speed_svg(trials, 0.8)}) {
        EXPECT_EQ(s.rfind("<svg", 0), 0u);
        EXPECT_NE(s.find("</svg>"), std::string::npos);
        EXPECT_EQ(s.find("nan"), std::string::npos);
    }
}

TEST(Experiment, FailedRunStillWritesAManifest) {
    RunConfig c = RunConfig::defaults(ExperimentId::Exp1);
    c.world_file = "/nonexistent/world.txt";
    const auto dir = scratch_dir("manifest");
    EXPECT_THROW(run_experiment(c, dir), Error);
    std::ifstream m(dir / "manifest.txt");
    std::stringstream ss;
    ss << m.rdbuf();
    EXPECT_NE(ss.str().find("status error"), std::string::npos);
    fs::remove_all(dir);
}
