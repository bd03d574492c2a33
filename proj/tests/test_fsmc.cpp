#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "cdmanc/config.hpp"
#include "cdmanc/errors.hpp"
#include "cdmanc/fsmc.hpp"
#include "cdmanc/phy.hpp"
#include "cdmanc/units.hpp"

using namespace cdmanc;

namespace {

DecoupledChannel channel_with(double gamma_bar) {
    DecoupledChannel c;
    c.gamma_bar = gamma_bar;
    c.beta = 1.0 / gamma_bar;
    return c;
}

struct Dump {
    std::vector<std::vector<double>> p;
    std::vector<double> pi, rates;
};

std::vector<double> read_row(std::istream& is) {
    std::string line;
    std::getline(is, line);
    std::istringstream ls(line);
    std::vector<double> v;
    for (double x; ls >> x;) v.push_back(x);
    return v;
}

Dump parse_dump(std::istream& is) {
    Dump d;
    std::string line;
    std::size_t n = 0;
    while (std::getline(is, line)) {
        if (line.rfind("# fsmc states", 0) == 0) n = std::stoul(line.substr(14));
        if (line == "P") {
            for (std::size_t i = 0; i < n; ++i) d.p.push_back(read_row(is));
        } else if (line == "pi") {
            d.pi = read_row(is);
        } else if (line == "rates_blocks") {
            d.rates = read_row(is);
        }
    }
    return d;
}

}  // namespace

TEST_CASE("level crossing rate limits") {
    CHECK(level_crossing_rate(0.0, 2.0, 20.0) == 0.0);
    CHECK(level_crossing_rate(1.0, 2.0, 0.0) == 0.0);
    CHECK(level_crossing_rate(std::numeric_limits<double>::infinity(), 2.0, 20.0) == 0.0);
    CHECK(level_crossing_rate(1.0, 1.0, 10.0) == doctest::Approx(std::sqrt(2.0 * M_PI) * 10.0 * std::exp(-1.0)));
    CHECK_THROWS_AS(level_crossing_rate(-1.0, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(level_crossing_rate(1.0, 0.0, 1.0), DomainError);
}

TEST_CASE("level crossing rate peaks at half the mean") {
    const double gbar = 3.0;
    double best = 0.0, best_x = 0.0;
    for (int i = 1; i <= 60000; ++i) {
        const double x = i * 1e-4;
        const double v = level_crossing_rate(x, gbar, 20.0);
        if (v > best) best = v, best_x = x;
    }
    CHECK(best_x == doctest::Approx(gbar / 2).epsilon(1e-3));
}

TEST_CASE("state probabilities at -2 dB and 4 dB mean SNR, alpha 0.5") {
    const std::vector<double> at_m2{0.622, 0.234, 0.127, 0.017, 0.00044, 1.43e-7};
    const std::vector<double> at_4{0.25, 0.184, 0.261, 0.203, 0.096, 0.01, 3.991e-7};
    for (const auto& [snr, printed] : {std::pair{-2.0, at_m2}, std::pair{4.0, at_4}}) {
        SystemConfig cfg;
        cfg.snr_avg_db = snr;
        const auto pi = stationary_distribution(cfg.modes, solve_fixed_point(cfg).gamma_bar);
        double total = 0.0;
        for (double v : pi) total += v;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
        for (std::size_t i = 0; i < printed.size(); ++i) {
            INFO("snr " << snr << " state " << i << " pi " << pi[i]);
            if (printed[i] >= 1e-3) {
                CHECK(std::abs(pi[i] - printed[i]) <= 5e-3);
            } else {
                CHECK(std::abs(std::log10(pi[i] / printed[i])) <= 1.0);
            }
        }
    }
}

TEST_CASE("very high mean SNR concentrates on the top state") {
    const auto pi = stationary_distribution(ModeTable::hiperlan2(), 1e9);
    CHECK(pi.back() > 1.0 - 1e-6);
}

TEST_CASE("zero Doppler gives the identity chain") {
    SystemConfig cfg;
    cfg.f_m_hz = 0.0;
    const auto m = build_fsmc(cfg, channel_with(2.5));
    for (std::size_t i = 0; i < m.states(); ++i) {
        for (std::size_t j = 0; j < m.states(); ++j) CHECK(m.p(i, j) == (i == j ? 1.0 : 0.0));
    }
}

TEST_CASE("chain at 6 dB, alpha 0.5, f_m 20 Hz matches the golden dump") {
    SystemConfig cfg;
    const auto ch = solve_fixed_point(cfg);
    const auto m = build_fsmc(cfg, ch);
    std::ifstream gf(std::string(CDMANC_GOLDEN_DIR) + "/fsmc_6db_a05_fm20.txt");
    REQUIRE(gf.good());
    const Dump golden = parse_dump(gf);
    std::stringstream ss;
    write_matrix_dump(ss, m);
    const Dump ours = parse_dump(ss);
    REQUIRE(golden.p.size() == 7);
    REQUIRE(ours.p.size() == 7);
    for (std::size_t i = 0; i < 7; ++i) {
        for (std::size_t j = 0; j < 7; ++j) CHECK(ours.p[i][j] == doctest::Approx(golden.p[i][j]).epsilon(1e-9));
        CHECK(ours.pi[i] == doctest::Approx(golden.pi[i]).epsilon(1e-9));
        CHECK(ours.rates[i] == doctest::Approx(golden.rates[i]).epsilon(1e-14));
    }
    CHECK(m.rates_blocks.back() == doctest::Approx(18.0));
    CHECK(m.mean_rate_blocks() == doctest::Approx(4.757).epsilon(1e-3));
}

TEST_CASE("off-diagonals scale linearly with Doppler") {
    SystemConfig a, b;
    a.f_m_hz = 5.0;
    b.f_m_hz = 10.0;
    const auto ch = channel_with(2.0);
    const auto ma = build_fsmc(a, ch);
    const auto mb = build_fsmc(b, ch);
    for (std::size_t i = 0; i < 7; ++i) {
        for (std::size_t j = 0; j < 7; ++j) {
            if (i != j) CHECK(mb.p(i, j) == doctest::Approx(2.0 * ma.p(i, j)).epsilon(1e-13));
        }
    }
}

TEST_CASE("chain invariants over random valid operating points") {
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> snr(-4.0, 10.0), alpha(0.1, 2.0), fm(0.0, 20.0);
    int built = 0;
    for (int trial = 0; trial < 50; ++trial) {
        SystemConfig cfg;
        cfg.snr_avg_db = snr(gen);
        cfg.alpha = alpha(gen);
        cfg.f_m_hz = fm(gen);
        const auto ch = solve_fixed_point(cfg);
        FsmcModel m;
        try {
            m = build_fsmc(cfg, ch);
        } catch (const SlowFadingViolation&) {
            continue;
        }
        ++built;
        CHECK_NOTHROW(m.validate());
        CHECK(m.stationarity_mismatch() < 1e-12);
        for (std::size_t i = 0; i < m.states(); ++i) {
            for (std::size_t j = 0; j < m.states(); ++j) {
                if (i > j + 1 || j > i + 1) CHECK(m.p(i, j) == 0.0);
            }
        }
    }
    CHECK(built >= 25);
}

TEST_CASE("fast fading at 50 Hz breaks the per-slot transition model") {
    SystemConfig cfg;
    cfg.f_m_hz = 50.0;
    const auto ch = solve_fixed_point(cfg);
    CHECK_THROWS_AS(build_fsmc(cfg, ch), SlowFadingViolation);
    try {
        build_fsmc(cfg, ch);
    } catch (const SlowFadingViolation& e) {
        CHECK(e.state() < 7);
    }
}

TEST_CASE("validate rejects malformed chains") {
    SystemConfig cfg;
    auto m = build_fsmc(cfg, solve_fixed_point(cfg));
    auto bad = m;
    bad.p(0, 0) += 1e-9;
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad = m;
    bad.pi.pop_back();
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad = m;
    bad.rates_blocks[2] = -1.0;
    CHECK_THROWS_AS(bad.validate(), DomainError);
}
