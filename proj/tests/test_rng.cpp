#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "smallnoise/parallel.hpp"
#include "smallnoise/rng.hpp"
#include "smallnoise/stats.hpp"

using namespace smallnoise;

TEST_CASE("draws are pure functions of (seed, stream, index)") {
    const RandomStream a(42, 7);
    const RandomStream b(42, 7);
    for (std::uint64_t i : {0ull, 1ull, 5ull, 1000000ull}) {
        CHECK(a.normal(i) == b.normal(i));
        CHECK(a.uniform(i) == b.uniform(i));
    }
    // order of access is irrelevant
    const double later = a.normal(10);
    const double earlier = a.normal(3);
    CHECK(later == b.normal(10));
    CHECK(earlier == b.normal(3));
}

TEST_CASE("different seeds and streams decorrelate") {
    const RandomStream a(1, 0);
    const RandomStream b(2, 0);
    const RandomStream c(1, 1);
    int equal_ab = 0;
    int equal_ac = 0;
    for (std::uint64_t i = 0; i < 100; ++i) {
        equal_ab += a.normal(i) == b.normal(i);
        equal_ac += a.normal(i) == c.normal(i);
    }
    CHECK(equal_ab == 0);
    CHECK(equal_ac == 0);
}

TEST_CASE("normal moments") {
    const RandomStream stream(2024, 0);
    const std::size_t n = 200000;
    std::vector<double> draws(n);
    for (std::size_t i = 0; i < n; ++i) {
        draws[i] = stream.normal(i);
    }
    CHECK(std::abs(mean(draws)) < 3.0 / std::sqrt(static_cast<double>(n)));
    CHECK(variance(draws) == doctest::Approx(1.0).epsilon(0.02));
    // tails: P(|Z| > 2) = 0.0455
    std::size_t exceed = 0;
    for (double z : draws) {
        exceed += std::abs(z) > 2.0;
    }
    CHECK(static_cast<double>(exceed) / static_cast<double>(n) ==
          doctest::Approx(0.0455).epsilon(0.05));
}

TEST_CASE("uniforms stay inside the open interval") {
    const RandomStream stream(7, 3);
    for (std::uint64_t i = 0; i < 10000; ++i) {
        const double u = stream.uniform(i);
        CHECK(u > 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("parallel fill equals serial fill") {
    const std::size_t n = 50000;
    std::vector<double> serial(n);
    for (std::size_t i = 0; i < n; ++i) {
        serial[i] = replication_stream(99, i, 0).normal(i);
    }
    std::vector<double> parallel(n);
    parallel_for(
        n, [&](std::size_t i) { parallel[i] = replication_stream(99, i, 0).normal(i); }, 4);
    CHECK(serial == parallel);
}

TEST_CASE("replication channels do not collide") {
    // channel 1 of replication k must differ from channel 0 of replication k
    // and from channel 0 of replication k+1
    const auto a = replication_stream(5, 0, 0);
    const auto b = replication_stream(5, 0, 1);
    const auto c = replication_stream(5, 1, 0);
    int clashes = 0;
    for (std::uint64_t i = 0; i < 50; ++i) {
        clashes += a.normal(i) == b.normal(i);
        clashes += a.normal(i) == c.normal(i);
        clashes += b.normal(i) == c.normal(i);
    }
    CHECK(clashes == 0);
}
