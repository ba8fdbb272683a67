#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "jcpe/constellation.hpp"
#include "jcpe/metrics.hpp"
#include "oracles.hpp"

using namespace jcpe;
using Catch::Approx;

TEST_CASE("ebn0 conversion formula") {
    CHECK(ebn0_to_noise_var(0.0, 1.0, 0.0, 4) == Approx(0.25));
    CHECK(ebn0_to_noise_var(10.0, 1.0, 0.01, 16) == Approx(1.01 / 80.0));
    // pilot penalty direction
    CHECK(ebn0_to_noise_var(10.0, 1.0, 0.05, 16) > ebn0_to_noise_var(10.0, 1.0, 0.01, 16));
    // round trip
    for (double db : {-3.0, 0.0, 7.5, 20.0}) {
        const double s2 = ebn0_to_noise_var(db, 2.0, 0.02, 64);
        CHECK(noise_var_to_ebn0_db(s2, 2.0, 0.02, 64) == Approx(db).margin(1e-12));
    }
    CHECK_THROWS_AS(ebn0_to_noise_var(0.0, 1.0, -0.1, 4), std::invalid_argument);
}

TEST_CASE("ber accumulator") {
    BerAccumulator acc;
    std::vector<std::uint8_t> a(1000, 0), b(1000, 0);
    acc.add(a, b);
    CHECK(acc.errors == 0);
    for (auto& x : b) x = 1;
    acc.add(a, b);
    CHECK(acc.errors == 1000);
    CHECK(acc.bits == 2000);
    CHECK_FALSE(acc.done());
    CHECK_THROWS_AS(acc.add(a, std::vector<std::uint8_t>(5)), std::invalid_argument);

    // random independent streams: BER 0.5 within 3 sigma binomial
    std::mt19937_64 gen(1);
    std::vector<std::uint8_t> x(1000000), y(1000000);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = static_cast<std::uint8_t>(gen() & 1);
        y[i] = static_cast<std::uint8_t>(gen() & 1);
    }
    BerAccumulator r;
    r.add(x, y);
    const double sigma = std::sqrt(0.25 / 1e6);
    CHECK(std::abs(r.ber() - 0.5) < 3.0 * sigma);

    BerAccumulator merged;
    merged.merge(acc);
    merged.merge(r);
    CHECK(merged.bits == acc.bits + r.bits);
    CHECK(merged.errors == acc.errors + r.errors);
}

TEST_CASE("fec codebook defaults are ordered") {
    const auto cb = FecCodebook::defaults();
    REQUIRE(cb.entries.size() == 6);
    CHECK(cb.entries[3].first == Approx(1.44e-2));
    CHECK(cb.entries[3].second == Approx(0.20));
    for (std::size_t i = 1; i < cb.entries.size(); ++i) {
        CHECK(cb.entries[i].first > cb.entries[i - 1].first);
        CHECK(cb.entries[i].second > cb.entries[i - 1].second);
    }
}

TEST_CASE("gmi asymptotes") {
    // noiseless, correct decisions: AIR -> log2(M) * data fraction
    std::vector<double> llrs(4000);
    std::vector<std::uint8_t> bits(4000);
    std::mt19937_64 gen(2);
    for (std::size_t i = 0; i < llrs.size(); ++i) {
        bits[i] = static_cast<std::uint8_t>(gen() & 1);
        llrs[i] = bits[i] ? -200.0 : 200.0;
    }
    CHECK(gmi_air(llrs, bits, 4, 0.01) == Approx(4.0 / 1.01).epsilon(1e-9));

    // all-zero LLRs carry no information
    std::fill(llrs.begin(), llrs.end(), 0.0);
    CHECK(gmi_air(llrs, bits, 4, 0.0) == Approx(0.0).margin(1e-12));

    const std::vector<double> no_llrs;
    const std::vector<std::uint8_t> no_bits;
    CHECK_THROWS_AS(gmi_air(no_llrs, no_bits, 4, 0.0), std::invalid_argument);
}

TEST_CASE("awgn gmi matches the quadrature oracle") {
    const auto c = build_qam(16, 1.0);
    const double ebn0_db = 8.0;
    const double sigma2 = ebn0_to_noise_var(ebn0_db, 1.0, 0.0, 16);
    const double reference = oracles::awgn_gmi_quadrature(c, sigma2);

    // Monte Carlo with exact LLRs
    std::mt19937_64 gen(3);
    std::normal_distribution<double> g(0.0, std::sqrt(sigma2));
    std::vector<double> llrs;
    std::vector<std::uint8_t> bits;
    const int nsym = 200000;
    for (int t = 0; t < nsym; ++t) {
        const int s = static_cast<int>(gen() % 16);
        const cplx y = c.points[s] + cplx(g(gen), g(gen));
        for (double l : bit_llrs_exact(c, y, sigma2)) llrs.push_back(l);
        append_label_bits(c, c.labels[s], bits);
    }
    const double sim = gmi_air(llrs, bits, 4, 0.0);
    CHECK(sim == Approx(reference).margin(0.02));
}

TEST_CASE("gmi never exceeds the data-fraction ceiling") {
    std::mt19937_64 gen(4);
    std::normal_distribution<double> g(0.0, 3.0);
    std::vector<double> llrs(5000);
    std::vector<std::uint8_t> bits(5000);
    for (std::size_t i = 0; i < llrs.size(); ++i) {
        llrs[i] = g(gen);
        bits[i] = static_cast<std::uint8_t>(gen() & 1);
    }
    const double air = gmi_air(llrs, bits, 6, 0.03);
    CHECK(air >= 0.0);
    CHECK(air <= 6.0 / 1.03 + 1e-12);
}

TEST_CASE("required ebn0 inverts the qpsk theory curve") {
    const auto c = build_qam(4, 1.0);
    auto ber_at = [&](double db) { return theory_ber_awgn(c, std::pow(10.0, db / 10.0)); };
    const double target = 1.44e-2;
    const double found = required_ebn0(ber_at, target, 0.0, 12.0, 0.01);
    CHECK(ber_at(found) == Approx(target).epsilon(0.02));

    // bracket that does not straddle
    CHECK_THROWS_AS(required_ebn0(ber_at, 0.2, 0.0, 12.0), std::runtime_error);
    CHECK_THROWS_AS(required_ebn0(ber_at, 1e-30, 0.0, 12.0), std::runtime_error);
    CHECK_THROWS_AS(required_ebn0(ber_at, target, 12.0, 0.0), std::invalid_argument);
}
