#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "cdmanc/errors.hpp"
#include "cdmanc/experiment.hpp"

using namespace cdmanc;

namespace {

ExperimentSpec parse(const std::string& text, bool require_sweep = true) {
    std::istringstream in(text);
    return parse_experiment(in, require_sweep);
}

std::string error_key(const std::string& text) {
    try {
        parse(text);
    } catch (const ConfigError& e) {
        return e.key();
    }
    return "";
}

const char* kFast =
    "horizon_slots = 600\n"
    "theta_points = 24\n"
    "resolution_blocks = 0.01\n";

std::string strip_generated(const std::string& csv) {
    std::istringstream in(csv);
    std::string line, out;
    while (std::getline(in, line)) {
        if (line.rfind("# generated", 0) != 0) out += line + "\n";
    }
    return out;
}

}  // namespace

TEST_CASE("parse a full recipe") {
    const auto s = parse(
        "# comment line\n"
        "snr_avg_db = 4.5\n"
        "alpha = 0.75   # trailing comment\n"
        "f_m_hz = 10\n"
        "epsilon = 1e-4\n"
        "d_guarantee_slots = 50\n"
        "horizon_slots = 2000\n"
        "theta_min = 1e-3\n"
        "theta_max = 10\n"
        "theta_points = 30\n"
        "refine_theta = false\n"
        "sweep.axis = alpha\n"
        "sweep.start = 0.1\n"
        "sweep.stop = 0.5\n"
        "sweep.step = 0.1\n"
        "validate.enabled = true\n"
        "validate.slots = 1000\n"
        "validate.seed = 3\n"
        "output = out.csv\n"
        "workers = 2\n");
    CHECK(s.base.snr_avg_db == 4.5);
    CHECK(s.base.alpha == 0.75);
    CHECK(s.base.f_m_hz == 10.0);
    CHECK(s.epsilon == 1e-4);
    CHECK(s.d_guarantee_slots == 50);
    CHECK(s.netcal.delay.horizon_slots == 2000);
    CHECK(s.netcal.delay.theta_grid.size() == 30);
    CHECK(s.netcal.delay.theta_grid.front() == doctest::Approx(1e-3));
    CHECK(s.netcal.delay.theta_grid.back() == doctest::Approx(10.0));
    CHECK(!s.netcal.delay.refine);
    CHECK(s.sweep.axis == SweepAxis::kAlpha);
    REQUIRE(s.sweep.values.size() == 5);
    CHECK(s.sweep.values.back() == doctest::Approx(0.5));
    CHECK(s.validation.enabled);
    CHECK(s.validation.slots == 1000);
    CHECK(s.validation.seed == 3);
    CHECK(s.output_path == "out.csv");
    CHECK(s.workers == 2);
}

TEST_CASE("sweep lists, axes and custom mode tables") {
    const auto s = parse(
        "sweep.axis = delay_guarantee\n"
        "sweep.values = 10, 20,40\n"
        "[modes]\n"
        "0 BPSK 0 -inf\n"
        "1 QPSK 1.0 0.19\n");
    CHECK(s.sweep.values == std::vector<double>{10, 20, 40});
    CHECK(s.base.modes.size() == 2);
    CHECK(s.base.modes[1].rate_bps_hz == 1.0);
    for (auto axis : {SweepAxis::kDelayGuarantee, SweepAxis::kEpsilon, SweepAxis::kSnrAvgDb, SweepAxis::kAlpha,
                      SweepAxis::kFmHz}) {
        CHECK(parse_sweep_axis(to_string(axis)) == axis);
    }
    const auto single = parse("alpha = 0.3\n", false);
    CHECK(single.base.alpha == 0.3);
}

TEST_CASE("sweep ranges include the stop value despite rounding") {
    const auto s = parse("sweep.axis = snr_avg_db\nsweep.start = -4\nsweep.stop = 10\nsweep.step = 0.2\n");
    CHECK(s.sweep.values.size() == 71);
    CHECK(s.sweep.values.back() == doctest::Approx(10.0));
}

TEST_CASE("configuration errors name the offending key") {
    CHECK(error_key("alpha = -1\nsweep.axis = alpha\nsweep.values = 1\n") == "alpha");
    CHECK(error_key("alpha = x\n") == "alpha");
    CHECK(error_key("bogus = 1\n") == "bogus");
    CHECK(error_key("epsilon = 2\nsweep.axis = alpha\nsweep.values = 1\n") == "epsilon");
    CHECK(error_key("sweep.axis = speed\n") == "sweep.axis");
    CHECK(error_key("sweep.axis = alpha\n") == "sweep.values");
    CHECK(error_key("sweep.axis = alpha\nsweep.start = 1\nsweep.stop = 2\n") == "sweep.step");
    CHECK(error_key("sweep.axis = alpha\nsweep.start = 2\nsweep.stop = 1\nsweep.step = 1\n") == "sweep.stop");
    CHECK(error_key("sweep.axis = epsilon\nsweep.values = 0.5, 1.5\n") == "sweep");
    CHECK(error_key("theta_min = 0\nsweep.axis = alpha\nsweep.values = 1\n") == "theta_min");
    CHECK(error_key("d_guarantee_slots = 1.5\n") == "d_guarantee_slots");
    CHECK(error_key("refine_theta = maybe\n") == "refine_theta");
    CHECK(error_key("[modes]\n0 BPSK 0.1 -inf\n") == "modes");
    CHECK(error_key("[other]\n") == "[other]");
    CHECK(error_key("no equals sign\n") == "no equals sign");
    CHECK_THROWS_AS(load_experiment("/nonexistent/recipe.cfg"), ConfigError);
}

TEST_CASE("operating points follow the sweep axis") {
    auto s = parse("sweep.axis = delay_guarantee\nsweep.values = 7\n");
    CHECK(operating_point(s, 7.0).d_guarantee_slots == 7);
    s.sweep.axis = SweepAxis::kEpsilon;
    CHECK(operating_point(s, 1e-3).epsilon == 1e-3);
    s.sweep.axis = SweepAxis::kFmHz;
    CHECK(operating_point(s, 33.0).cfg.f_m_hz == 33.0);
    s.sweep.axis = SweepAxis::kSnrAvgDb;
    CHECK(operating_point(s, -1.0).cfg.snr_avg_db == -1.0);
}

TEST_CASE("sweep rows are deterministic and bounded by the capacity limit") {
    auto s = parse(std::string(kFast) + "sweep.axis = delay_guarantee\nsweep.values = 30, 60, 100\nvalidate.enabled = true\nvalidate.slots = 20000\n");
    const auto rows = run_sweep(s);
    REQUIRE(rows.size() == 3);
    double prev = 0.0;
    for (const auto& r : rows) {
        CHECK(r.error.empty());
        CHECK(r.throughput.lambda_d_bps <= r.throughput.c_lim_bps);
        CHECK(r.throughput.lambda_d_bps >= prev);
        CHECK(r.empirical_violation.has_value() == (r.throughput.lambda_blocks > 0.0));
        prev = r.throughput.lambda_d_bps;
    }
    std::ostringstream a, b;
    write_csv(a, s, rows);
    s.workers = 3;
    write_csv(b, s, run_sweep(s));
    CHECK(strip_generated(a.str()).find("# workers") == std::string::npos);
    CHECK(strip_generated(a.str()) == strip_generated(b.str()));
    CHECK(a.str().find("# generated") != std::string::npos);
    CHECK(a.str().find("throughput_unit") != std::string::npos);
}

TEST_CASE("fast-fading points are flagged, not fatal") {
    const auto s = parse(std::string(kFast) + "f_m_hz = 50\nsweep.axis = snr_avg_db\nsweep.values = 0, 6\n");
    const auto rows = run_sweep(s);
    for (const auto& r : rows) {
        CHECK(r.slow_fading_violation);
        CHECK(r.violating_state.has_value());
        CHECK(!r.valid());
        CHECK(r.throughput.lambda_d_bps == 0.0);
        CHECK(r.throughput.c_lim_bps > 0.0);
    }
    std::ostringstream os;
    write_csv(os, s, rows, false);
    CHECK(os.str().find("# generated") == std::string::npos);
    CHECK(os.str().find(",1,error,") != std::string::npos);
}

TEST_CASE("degenerate guarantees produce zero-throughput rows") {
    const auto s = parse(std::string(kFast) + "sweep.axis = delay_guarantee\nsweep.values = 5\n");
    const auto rows = run_sweep(s);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].throughput.degenerate);
    CHECK(rows[0].throughput.lambda_d_bps == 0.0);
    CHECK(!rows[0].valid());
}
