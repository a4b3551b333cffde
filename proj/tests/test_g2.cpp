#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qspec/g2.hpp"

#include <cmath>

using namespace qspec::g2;

namespace {

struct CentralBin {
    double g2;
    double sigma;
};

CentralBin central_bin(const G2Histogram& h) {
    const std::size_t mid = h.tau_ns.size() / 2;
    return {h.g2[mid], h.sigma[mid]};
}

} // namespace

TEST_CASE("pure Poisson background is flat at one") {
    const auto ts = simulate_g2(0.0, 1.0e6, 3.0, 101);
    const auto h = g2_histogram(ts, 2.0, 60.0);
    for (std::size_t i = 0; i < h.tau_ns.size(); ++i) {
        CAPTURE(h.tau_ns[i]);
        CHECK(std::abs(h.g2[i] - 1.0) < 4.0 * h.sigma[i]);
    }
}

TEST_CASE("ideal emitter antibunches at zero delay") {
    const auto ts = simulate_g2(1.0, 1.0e6, 3.0, 102);
    const auto h = g2_histogram(ts, 0.4, 50.0);
    const auto c = central_bin(h);
    CHECK(std::abs(c.g2 - 0.0) < 3.0 * c.sigma);
    // far wings recover the uncorrelated level
    double far = 0.0;
    std::size_t nfar = 0;
    for (std::size_t i = 0; i < h.tau_ns.size(); ++i)
        if (std::abs(h.tau_ns[i]) > 45.0) {
            far += h.g2[i];
            ++nfar;
        }
    CHECK(far / static_cast<double>(nfar) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("background mixing follows one minus p squared") {
    for (const double p : {0.0, 0.5, 0.908, 1.0}) {
        CAPTURE(p);
        const auto ts = simulate_g2(p, 1.0e6, 3.0, 7000 + static_cast<std::uint64_t>(p * 1000));
        const auto h = g2_histogram(ts, 0.4, 50.0);
        const auto c = central_bin(h);
        const double want = 1.0 - p * p;
        CHECK(std::abs(c.g2 - want) < 3.0 * c.sigma + 0.012); // small same-bin residual at p ~ 1
    }
}

TEST_CASE("the reference signal fraction reproduces a 0.175 dip") {
    const auto ts = simulate_g2(0.908, 1.0e6, 4.0, 424242);
    const auto h = g2_histogram(ts, 0.4, 50.0);
    const auto c = central_bin(h);
    CHECK(std::abs(c.g2 - 0.175) < 3.0 * c.sigma);
}

TEST_CASE("histogram validation and structure") {
    TimestampList empty;
    empty.channel0_ns = {1.0, 2.0};
    CHECK_THROWS_AS(g2_histogram(empty, 1.0, 10.0), std::invalid_argument);

    const auto ts = simulate_g2(0.5, 2.0e5, 0.5, 9);
    const auto h = g2_histogram(ts, 1.0, 20.0);
    CHECK(h.tau_ns.size() % 2 == 1);
    CHECK(h.tau_ns[h.tau_ns.size() / 2] == 0.0);
    CHECK(h.tau_ns.front() == doctest::Approx(-h.tau_ns.back()));
    CHECK(h.expected_per_bin > 0.0);

    CHECK_THROWS_AS(simulate_g2(1.2, 1e6, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(simulate_g2(0.5, -1.0, 1.0, 1), std::invalid_argument);
    // signal rate beyond the re-excitation bottleneck cannot be produced
    CHECK_THROWS_AS(simulate_g2(1.0, 2.0e8, 0.01, 1), std::invalid_argument);
}

TEST_CASE("timestamps are sorted and reproducible per seed") {
    const auto a = simulate_g2(0.7, 5.0e5, 0.5, 77);
    const auto b = simulate_g2(0.7, 5.0e5, 0.5, 77);
    CHECK(a.channel0_ns == b.channel0_ns);
    CHECK(a.channel1_ns == b.channel1_ns);
    for (std::size_t i = 1; i < a.channel0_ns.size(); ++i)
        REQUIRE(a.channel0_ns[i] >= a.channel0_ns[i - 1]);
    for (std::size_t i = 1; i < a.channel1_ns.size(); ++i)
        REQUIRE(a.channel1_ns[i] >= a.channel1_ns[i - 1]);
}
