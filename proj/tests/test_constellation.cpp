#include <catch_amalgamated.hpp>

#include <bit>
#include <cmath>
#include <random>
#include <set>

#include "jcpe/constellation.hpp"

using namespace jcpe;
using Catch::Approx;

TEST_CASE("qpsk normalization forces unit-energy points") {
    const auto c = build_qam(4, 1.0);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (const auto& p : c.points) {
        CHECK(std::abs(std::abs(p.real()) - inv_sqrt2) < 1e-15);
        CHECK(std::abs(std::abs(p.imag()) - inv_sqrt2) < 1e-15);
    }
}

TEST_CASE("constellation invariants hold for all supported orders") {
    for (int m : {4, 16, 64, 256, 1024}) {
        const auto c = build_qam(m, 2.5);
        cplx mean(0.0, 0.0);
        double energy = 0.0;
        for (const auto& p : c.points) {
            mean += p;
            energy += std::norm(p);
        }
        CHECK(std::abs(mean) < 1e-12);
        CHECK(energy / m == Approx(2.5).epsilon(1e-12));

        std::set<std::uint32_t> labs(c.labels.begin(), c.labels.end());
        CHECK(labs.size() == static_cast<std::size_t>(m));
        CHECK(*labs.rbegin() == static_cast<std::uint32_t>(m - 1));
    }
}

TEST_CASE("gray property: nearest neighbors differ in exactly one bit") {
    const auto c = build_qam(16, 1.0);
    // brute force over all point pairs
    double dmin = 1e300;
    for (int i = 0; i < c.order; ++i)
        for (int j = i + 1; j < c.order; ++j)
            dmin = std::min(dmin, std::abs(c.points[i] - c.points[j]));
    int pairs = 0;
    for (int i = 0; i < c.order; ++i)
        for (int j = i + 1; j < c.order; ++j) {
            if (std::abs(c.points[i] - c.points[j]) > dmin * 1.0001) continue;
            ++pairs;
            CHECK(std::popcount(c.labels[i] ^ c.labels[j]) == 1);
        }
    CHECK(pairs == 48 / 2); // 48 ordered pairs in 16QAM
}

TEST_CASE("build_qam rejects unsupported orders") {
    CHECK_THROWS_AS(build_qam(8, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(build_qam(32, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(build_qam(4, 0.0), std::invalid_argument);
}

TEST_CASE("map_bits round trip at zero noise") {
    const auto c = build_qam(16, 1.0);
    std::mt19937_64 gen(7);
    std::vector<std::uint8_t> bits(4000);
    for (auto& b : bits) b = static_cast<std::uint8_t>(gen() & 1);
    const auto syms = map_bits(c, bits);
    std::vector<std::uint8_t> back;
    for (const auto& s : syms) append_label_bits(c, demap_hard(c, s).second, back);
    CHECK(back == bits);
}

TEST_CASE("map_bits edge cases") {
    const auto c = build_qam(4, 1.0);
    CHECK(map_bits(c, {}).empty());
    std::vector<std::uint8_t> odd{1};
    CHECK_THROWS_AS(map_bits(c, odd), std::invalid_argument);
}

TEST_CASE("demap_hard tie-break and perturbation robustness") {
    const auto c = build_qam(4, 1.0);
    // y = 0 is equidistant from all QPSK points: lowest index wins
    CHECK(demap_hard(c, cplx(0.0, 0.0)).first == c.points[0]);

    const auto c16 = build_qam(16, 1.0);
    double dmin = 1e300;
    for (int i = 0; i < c16.order; ++i)
        for (int j = i + 1; j < c16.order; ++j)
            dmin = std::min(dmin, std::abs(c16.points[i] - c16.points[j]));
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(-0.49, 0.49);
    for (int i = 0; i < c16.order; ++i)
        for (int t = 0; t < 20; ++t) {
            const cplx y = c16.points[i] + cplx(u(gen), u(gen)) * dmin * 0.5;
            CHECK(demap_hard_index(c16, y) == i);
            CHECK(slice_index(c16, y) == i);
        }
}

TEST_CASE("llrs vanish by symmetry at the origin") {
    const auto c = build_qam(4, 1.0);
    for (double llr : bit_llrs_exact(c, cplx(0.0, 0.0), 0.25)) CHECK(std::abs(llr) < 1e-12);
}

TEST_CASE("llr against direct two-term scalar evaluation") {
    const auto c = build_qam(4, 1.0);
    const double sigma2 = 0.25;
    const cplx y = c.points[demap_hard_index(c, cplx(0.7, 0.7))]; // (1+j)/sqrt2
    // oracle: direct sums over the four points with scalar arithmetic
    const auto llrs = bit_llrs_exact(c, y, sigma2);
    for (int b = 0; b < 2; ++b) {
        double s0 = 0.0, s1 = 0.0;
        for (int i = 0; i < 4; ++i) {
            const double e = std::exp(-std::norm(y - c.points[i]) / (2.0 * sigma2));
            if (c.labels[i] & (1u << (1 - b)))
                s1 += e;
            else
                s0 += e;
        }
        CHECK(llrs[b] == Approx(std::log(s0 / s1)).margin(1e-12));
    }
}

TEST_CASE("llr signs match hard bits in the noiseless limit") {
    for (int m : {4, 16, 1024}) {
        const auto c = build_qam(m, 1.0);
        const int i = m / 3;
        const auto llrs = bit_llrs_exact(c, c.points[i], 1e-4);
        for (int b = 0; b < c.bits_per_symbol; ++b) {
            const int bit = (c.labels[i] >> (c.bits_per_symbol - 1 - b)) & 1;
            CHECK((bit == 1) == (llrs[b] < 0));
        }
    }
    CHECK_THROWS_AS(bit_llrs_exact(build_qam(4, 1.0), cplx(0, 0), 0.0), std::invalid_argument);
}

TEST_CASE("theory ber: closed-form qpsk point and monotonicity") {
    const auto c4 = build_qam(4, 1.0);
    // Q(sqrt(2)) at Eb/N0 = 0 dB
    const double q_sqrt2 = 0.5 * std::erfc(std::sqrt(2.0) / std::sqrt(2.0));
    CHECK(theory_ber_awgn(c4, 1.0) == Approx(q_sqrt2).epsilon(1e-10));
    CHECK(theory_ber_awgn(c4, 1.0) == Approx(7.865e-2).epsilon(1e-3));
    CHECK(theory_ber_awgn(c4, 1e6) < 1e-12);

    for (int m : {4, 16, 64, 256, 1024}) {
        const auto c = build_qam(m, 1.0);
        double prev = 1.0;
        for (double db = -2.0; db < 22.0; db += 0.5) {
            const double ber = theory_ber_awgn(c, std::pow(10.0, db / 10.0));
            CHECK(ber < prev);
            prev = ber;
        }
    }
}

TEST_CASE("llr hard decision agrees with demap_hard away from boundaries") {
    const auto c = build_qam(64, 1.0);
    std::mt19937_64 gen(11);
    std::normal_distribution<double> g(0.0, 0.3);
    int checked = 0;
    for (int t = 0; t < 500; ++t) {
        const cplx y(g(gen), g(gen));
        const int idx = demap_hard_index(c, y);
        // skip near-tie cases
        double d0 = 1e300, d1 = 1e300;
        for (int i = 0; i < c.order; ++i) {
            const double d = std::norm(y - c.points[i]);
            if (d < d0) {
                d1 = d0;
                d0 = d;
            } else if (d < d1) {
                d1 = d;
            }
        }
        if (d1 - d0 < 1e-3) continue;
        ++checked;
        const auto llrs = bit_llrs_exact(c, y, 1e-3);
        for (int b = 0; b < c.bits_per_symbol; ++b) {
            const int bit = (c.labels[idx] >> (c.bits_per_symbol - 1 - b)) & 1;
            CHECK((bit == 1) == (llrs[b] < 0));
        }
    }
    CHECK(checked > 400);
}
