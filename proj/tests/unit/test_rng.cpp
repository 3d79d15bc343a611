#include <doctest.h>

#include "taml/rng.hpp"

using namespace taml;

TEST_CASE("golden first draws are frozen for seed 0") {
    // Generated once from the pinned splitmix64/xoshiro256** pipeline.
    CHECK(Rng(0).next_int(5) == 3);
    Rng r(0);
    CHECK(r.next_u64() == 11091344671253066420ull);
    CHECK(r.next_u64() == 13793997310169335082ull);
    CHECK(r.next_u64() == 1900383378846508768ull);
    CHECK(Rng(0).uniform(0.0, 1.0) == doctest::Approx(0.60126299941790484).epsilon(1e-15));
    Rng r7(7);
    const std::int64_t expect[] = {7, 2, 8, 9, 9};
    for (std::int64_t e : expect) CHECK(r7.next_int(10) == e);
}

TEST_CASE("uniform draws in [0,1) have mean 0.5 within 0.01 over 1e5 samples") {
    Rng r(123);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform(0.0, 1.0);
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        sum += u;
    }
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.02));
    CHECK(std::abs(sum / n - 0.5) <= 0.01);
}

TEST_CASE("equal seeds produce identical 1000-draw streams") {
    Rng a(99), b(99);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("normal draws have roughly standard moments") {
    Rng r(5);
    double sum = 0.0, sq = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double x = r.normal();
        sum += x;
        sq += x * x;
    }
    CHECK(std::abs(sum / n) <= 0.02);
    CHECK(sq / n == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("bounds are validated") {
    Rng r(0);
    CHECK_THROWS_AS(r.uniform(1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(r.uniform(2.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(r.next_int(0), std::invalid_argument);
}

TEST_CASE("derived streams are reproducible and distinct per stream id") {
    Rng a = Rng::derive(42, 1);
    Rng b = Rng::derive(42, 1);
    Rng c = Rng::derive(42, 2);
    bool all_equal = true;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        CHECK(x == b.next_u64());
        if (x != c.next_u64()) all_equal = false;
    }
    CHECK_FALSE(all_equal);
}
