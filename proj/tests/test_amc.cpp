#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "cdmanc/amc.hpp"
#include "cdmanc/errors.hpp"
#include "cdmanc/units.hpp"
#include "oracles.hpp"

using namespace cdmanc;

namespace {

CapacityOptions quick(std::uint64_t seed = 7) {
    CapacityOptions o;
    o.min_samples = 20000;
    o.batch_samples = 5000;
    o.seed = seed;
    return o;
}

const double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

TEST_CASE("standard constellations have unit energy") {
    for (const auto& c : {Constellation::bpsk(), Constellation::qpsk(), Constellation::qam16(), Constellation::qam64()}) {
        CHECK(std::abs(c.average_energy() - 1.0) < 1e-12);
    }
    CHECK(Constellation::qam64().size() == 64);
    CHECK(Constellation::by_name("16-qam").size() == 16);
    CHECK_THROWS_AS(Constellation::by_name("8-PSK"), DomainError);
}

TEST_CASE("constellation construction rejects bad point sets") {
    CHECK_THROWS_AS(Constellation("empty", {}), DomainError);
    CHECK_THROWS_AS(Constellation("loud", {{2.0, 0.0}, {-2.0, 0.0}}), DomainError);
    CHECK_NOTHROW(Constellation::normalized("loud", {{2.0, 0.0}, {-2.0, 0.0}}));
}

TEST_CASE("mode table validation") {
    CHECK(ModeTable::hiperlan2().size() == 7);
    const auto b = Constellation::bpsk();
    CHECK_THROWS_AS(ModeTable({{0, b, 0.0, -2.0}}), DomainError);                           // mode 0 not -inf
    CHECK_THROWS_AS(ModeTable({{0, b, 0.1, kNegInf}}), DomainError);                        // R_0 != 0
    CHECK_THROWS_AS(ModeTable({{0, b, 0.0, kNegInf}, {1, b, 0.0, 1.0}}), DomainError);      // rates not increasing
    CHECK_THROWS_AS(ModeTable({{0, b, 0.0, kNegInf}, {1, b, 0.5, 1.0}, {2, b, 0.7, 1.0}}), DomainError);
    CHECK_THROWS_AS(ModeTable({{0, b, 0.0, kNegInf}, {2, b, 0.5, 1.0}}), DomainError);      // index gap
    CHECK(ModeTable::hiperlan2().thresholds_linear().front() == 0.0);
}

TEST_CASE("zero SNR carries no information") {
    for (const auto& c : {Constellation::bpsk(), Constellation::qpsk(), Constellation::qam16(), Constellation::qam64()}) {
        const auto est = constellation_capacity(c, 0.0, quick());
        CHECK(std::abs(est.value_bps_hz) <= 3.0 * est.std_err + 1e-12);
    }
}

TEST_CASE("noiseless limit reaches log2 |M|") {
    CHECK(constellation_capacity(Constellation::qpsk(), 1e6, quick()).value_bps_hz == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(constellation_capacity(Constellation::qam64(), 1e5, quick()).value_bps_hz ==
          doctest::Approx(6.0).epsilon(1e-9));
    CHECK(constellation_capacity(Constellation::qam16(), std::numeric_limits<double>::infinity()).value_bps_hz == 4.0);
}

TEST_CASE("BPSK at -2.80 dB carries 0.5 bps/Hz") {
    CapacityOptions o;
    o.min_samples = 1000000;
    o.batch_samples = 50000;
    o.seed = 11;
    const double gamma = db_to_linear(-2.80);
    const auto est = constellation_capacity(Constellation::bpsk(), gamma, o);
    CHECK(est.samples >= 1000000);
    CHECK(std::abs(est.value_bps_hz - 0.5) < 0.01);
    // The 1-D quadrature reference for real BPSK.
    CHECK(std::abs(est.value_bps_hz - oracle::bpsk_capacity(gamma)) < 3.0 * est.std_err + 1e-3);
}

TEST_CASE("BPSK Monte Carlo tracks the quadrature reference across SNR") {
    for (double db : {-10.0, -5.0, 0.0, 3.0, 8.0}) {
        const double g = db_to_linear(db);
        const auto est = constellation_capacity(Constellation::bpsk(), g, quick(3));
        INFO("snr_db = " << db);
        CHECK(std::abs(est.value_bps_hz - oracle::bpsk_capacity(g)) < 4.0 * est.std_err + 1e-6);
    }
}

TEST_CASE("capacity domain and determinism") {
    CHECK_THROWS_AS(constellation_capacity(Constellation::bpsk(), -1.0), DomainError);
    const auto a = constellation_capacity(Constellation::qam16(), 3.0, quick(5));
    const auto b = constellation_capacity(Constellation::qam16(), 3.0, quick(5));
    CHECK(a.value_bps_hz == b.value_bps_hz);
    CHECK(a.std_err == b.std_err);
}

TEST_CASE("target std_err extends sampling, cap is flagged") {
    CapacityOptions o = quick();
    o.min_samples = 5000;
    o.target_std_err = 1e-9;
    o.max_samples = 20000;
    const auto est = constellation_capacity(Constellation::qpsk(), 2.0, o);
    CHECK(est.capped);
    CHECK(est.samples == 20000);

    o.target_std_err = 0.05;
    const auto ok = constellation_capacity(Constellation::qpsk(), 2.0, o);
    CHECK(!ok.capped);
    CHECK(ok.std_err <= 0.05);
}

TEST_CASE("capacity is non-decreasing in SNR") {
    for (const auto& c : {Constellation::bpsk(), Constellation::qpsk(), Constellation::qam16()}) {
        double prev = -1.0;
        double prev_se = 0.0;
        for (int i = 0; i < 20; ++i) {
            const double db = -10.0 + 1.5 * i;
            const auto est = constellation_capacity(c, db_to_linear(db), quick());
            CHECK(est.value_bps_hz >= prev - 3.0 * (est.std_err + prev_se));
            prev = est.value_bps_hz;
            prev_se = est.std_err;
        }
    }
}

TEST_CASE("capacity is invariant under a unit-modulus rotation") {
    const auto b = Constellation::bpsk();
    const auto r = b.rotated(0.7);
    for (double g : {0.3, 1.0, 4.0}) {
        const auto e1 = constellation_capacity(b, g, quick(1));
        const auto e2 = constellation_capacity(r, g, quick(2));
        CHECK(std::abs(e1.value_bps_hz - e2.value_bps_hz) < 3.0 * std::hypot(e1.std_err, e2.std_err) + 1e-9);
    }
}

TEST_CASE("threshold solver reproduces QPSK and 64-QAM switch points") {
    ThresholdSearchOptions o;
    o.capacity = quick(21);
    o.resolution_db = 5e-3;
    const auto reports = verify_thresholds(ModeTable::hiperlan2(), 0.3, o);
    REQUIRE(reports.size() == 6);
    CHECK(reports[1].mode == 2);
    CHECK(reports[1].solvable);
    CHECK(std::abs(*reports[1].solved_db - 0.19) < 0.3);
    CHECK(reports[5].mode == 6);
    CHECK(std::abs(*reports[5].solved_db - 14.37) < 0.3);
    for (const auto& r : reports) CHECK(r.within_tolerance);
}

TEST_CASE("a single-point constellation has no threshold") {
    const Constellation one("one", {{1.0, 0.0}});
    CHECK(constellation_capacity(one, 100.0).value_bps_hz == 0.0);
    const ModeTable t({{0, one, 0.0, kNegInf}, {1, one, 0.5, 1.0}});
    const auto reports = verify_thresholds(t, 0.3);
    REQUIRE(reports.size() == 1);
    CHECK(!reports[0].solvable);
    CHECK(!reports[0].solved_db);
    CHECK(!reports[0].within_tolerance);
}

TEST_CASE("mode selection examples") {
    const auto t = ModeTable::hiperlan2();
    CHECK(select_mode(t, db_to_linear(5.0)) == 3);
    CHECK(select_mode(t, db_to_linear(-2.81)) == 0);
    CHECK(select_mode(t, 0.0) == 0);
    CHECK(select_mode(t, db_to_linear(40.0)) == 6);
    for (std::size_t l = 1; l < t.size(); ++l) {
        CHECK(select_mode(t, t[l].threshold_linear()) == l);
        CHECK(select_mode(t, std::nextafter(t[l].threshold_linear(), 0.0)) == l - 1);
    }
    CHECK_THROWS_AS(select_mode(t, -1.0), DomainError);
}

TEST_CASE("mode selection matches a brute-force scan and is monotone") {
    const auto t = ModeTable::hiperlan2();
    std::mt19937_64 gen(99);
    std::uniform_real_distribution<double> db(-10.0, 25.0);
    std::vector<double> gammas;
    for (int i = 0; i < 1000; ++i) gammas.push_back(db_to_linear(db(gen)));
    for (double g : gammas) {
        std::size_t brute = 0;
        for (std::size_t l = 0; l < t.size(); ++l) {
            if (t[l].threshold_linear() <= g) brute = std::max(brute, l);
        }
        CHECK(select_mode(t, g) == brute);
    }
    std::sort(gammas.begin(), gammas.end());
    for (std::size_t i = 1; i < gammas.size(); ++i) CHECK(select_mode(t, gammas[i]) >= select_mode(t, gammas[i - 1]));
}

TEST_CASE("the selected rate is supported by the selected constellation") {
    const auto t = ModeTable::hiperlan2();
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> db(-4.0, 20.0);
    for (int i = 0; i < 25; ++i) {
        const double g = db_to_linear(db(gen));
        const std::size_t l = select_mode(t, g);
        const auto est = constellation_capacity(t[l].constellation, g, quick(static_cast<std::uint64_t>(i)));
        INFO("gamma = " << g << ", mode " << l);
        CHECK(t[l].rate_bps_hz <= est.value_bps_hz + 3.0 * est.std_err);
    }
    // At each switch-on point exactly.
    for (std::size_t l = 1; l < t.size(); ++l) {
        const auto est = constellation_capacity(t[l].constellation, t[l].threshold_linear(), quick(40 + l));
        CHECK(t[l].rate_bps_hz <= est.value_bps_hz + 3.0 * est.std_err);
    }
}
