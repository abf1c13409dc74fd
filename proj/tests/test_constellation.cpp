#include <algorithm>
#include <bit>
#include <cmath>

#include "dbicm/constellation.hpp"
#include "doctest.h"

using namespace dbicm;

namespace {

double mean_energy(const Constellation& c) {
    double e = 0.0;
    for (auto p : c.points()) e += std::norm(p);
    return e / c.order();
}

int hamming(std::uint32_t a, std::uint32_t b) { return std::popcount(a ^ b); }

}  // namespace

TEST_CASE("gray pam basics") {
    const Constellation c = Constellation::gray_pam(4);
    CHECK(c.order() == 4);
    CHECK(c.bits() == 2);
    CHECK(c.kind() == ModKind::Pam);
    CHECK(mean_energy(c) == doctest::Approx(1.0).epsilon(1e-12));

    // Amplitudes are the odd-integer grid scaled by sqrt(3/(L^2-1)).
    const double s = std::sqrt(3.0 / 15.0);
    // label p^(p>>1) for position p: amplitude order -3,-1,1,3 lands on
    // labels 00,01,11,10 (binary-reflected Gray).
    CHECK(c.point(0b00).real() == doctest::Approx(-3 * s));
    CHECK(c.point(0b01).real() == doctest::Approx(-1 * s));
    CHECK(c.point(0b11).real() == doctest::Approx(1 * s));
    CHECK(c.point(0b10).real() == doctest::Approx(3 * s));
    for (auto p : c.points()) CHECK(p.imag() == 0.0);
}

TEST_CASE("gray property: amplitude neighbors differ in one bit") {
    for (int levels : {2, 4, 8, 16, 32}) {
        const Constellation c = Constellation::gray_pam(levels);
        std::vector<std::uint32_t> order_by_amp(levels);
        std::vector<std::pair<double, std::uint32_t>> amps;
        for (int v = 0; v < levels; ++v) amps.push_back({c.point(v).real(), v});
        std::sort(amps.begin(), amps.end());
        for (int k = 0; k + 1 < levels; ++k)
            CHECK(hamming(amps[k].second, amps[k + 1].second) == 1);
    }
}

TEST_CASE("gray qam is the product of two pams") {
    for (int order : {4, 16, 64, 256}) {
        const Constellation q = Constellation::gray_qam(order);
        const int half = q.bits() / 2;
        const Constellation p = Constellation::gray_pam(1 << half);
        CHECK(q.order() == order);
        CHECK(q.kind() == ModKind::Qam);
        CHECK(mean_energy(q) == doctest::Approx(1.0).epsilon(1e-12));
        const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
        for (int v = 0; v < order; ++v) {
            const std::uint32_t a = static_cast<std::uint32_t>(v) >> half;
            const std::uint32_t b = static_cast<std::uint32_t>(v) & ((1u << half) - 1);
            CHECK(q.point(v).real() ==
                  doctest::Approx(p.point(a).real() * inv_sqrt2).epsilon(1e-12));
            CHECK(q.point(v).imag() ==
                  doctest::Approx(p.point(b).real() * inv_sqrt2).epsilon(1e-12));
        }
    }
}

TEST_CASE("real imag split round-trips") {
    const Constellation q = Constellation::gray_qam(64);
    const auto [re, im] = q.real_imag_split();
    CHECK(re.order() == 8);
    CHECK(im.order() == 8);
    for (int v = 0; v < 8; ++v) CHECK(re.point(v).real() == im.point(v).real());
    CHECK(mean_energy(re) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("label bits and masks agree, bit 0 is the MSB") {
    const Constellation q = Constellation::gray_qam(16);
    CHECK(q.label_bit(0b1000, 0) == 1);
    CHECK(q.label_bit(0b1000, 3) == 0);
    CHECK(q.bit_mask(0) == 0b1000);
    CHECK(q.bit_mask(3) == 0b0001);
    for (int v = 0; v < 16; ++v)
        for (int i = 0; i < 4; ++i)
            CHECK(((static_cast<std::uint32_t>(v) & q.bit_mask(i)) != 0) ==
                  (q.label_bit(v, i) == 1));
}

TEST_CASE("subset cardinality halves per constraint") {
    const Constellation q = Constellation::gray_qam(16);
    const std::vector<std::pair<int, int>> none;
    CHECK(q.subset(none).size() == 16);
    const std::vector<std::pair<int, int>> one{{1, 0}};
    const auto s1 = q.subset(one);
    CHECK(s1.size() == 8);
    for (auto v : s1) CHECK(q.label_bit(v, 1) == 0);
    const std::vector<std::pair<int, int>> three{{0, 1}, {2, 0}, {3, 1}};
    const auto s3 = q.subset(three);
    CHECK(s3.size() == 2);
    const std::vector<std::pair<int, int>> dup{{0, 1}, {0, 0}};
    CHECK_THROWS(q.subset(dup));
}

TEST_CASE("invalid constellation sizes rejected") {
    CHECK_THROWS(Constellation::gray_pam(3));
    CHECK_THROWS(Constellation::gray_pam(0));
    CHECK_THROWS(Constellation::gray_qam(8));   // not a square
    CHECK_THROWS(Constellation::gray_qam(32));  // not a square
}

TEST_CASE("delay scheme invariants") {
    const DelayScheme t({0, 1, 0, 1});
    CHECK(t.size() == 4);
    CHECK(t.t_max() == 1);
    CHECK(t.delayed() == std::vector<int>{1, 3});
    CHECK(t.undelayed() == std::vector<int>{0, 2});
    CHECK_FALSE(t.is_all_zero());
    CHECK(DelayScheme::all_zero(4).is_all_zero());
    CHECK(t.to_string() == "0,1,0,1");
    CHECK(DelayScheme::parse("0,1,0,1") == t);
    CHECK_THROWS(DelayScheme::parse("0,-1"));
    CHECK_THROWS(DelayScheme::parse("1,2"));  // minimum delay must be zero
    CHECK_THROWS(DelayScheme::parse("0,x"));
    CHECK_THROWS(DelayScheme(std::vector<int>{}));
}
