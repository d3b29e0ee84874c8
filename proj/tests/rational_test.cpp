#include "doctest.h"
#include "spalps/rational.hpp"

#include <cstdint>
#include <random>

using spalps::Rational;

TEST_CASE("construction normalizes sign and gcd") {
    CHECK(Rational(2, 4).num() == 1);
    CHECK(Rational(2, 4).den() == 2);
    CHECK(Rational(-2, 4).num() == -1);
    CHECK(Rational(2, -4).num() == -1);
    CHECK(Rational(2, -4).den() == 2);
    CHECK(Rational(-2, -4) == Rational(1, 2));
    CHECK(Rational(0, 7) == Rational(0));
    CHECK(Rational(0, 7).den() == 1);
    CHECK_THROWS_AS(Rational(1, 0), std::domain_error);
}

TEST_CASE("arithmetic stays exact") {
    Rational a(1, 3), b(1, 6);
    CHECK(a + b == Rational(1, 2));
    CHECK(a - b == Rational(1, 6));
    CHECK(a * b == Rational(1, 18));
    CHECK(a / b == Rational(2));
    CHECK(-a == Rational(-1, 3));
    CHECK_THROWS_AS(a / Rational(0), std::domain_error);

    Rational sum(0);
    for (int i = 0; i < 9; ++i) sum += Rational(1, 9);
    CHECK(sum.is_one());
}

TEST_CASE("comparisons cross-multiply without overflow") {
    CHECK(Rational(1, 3) < Rational(1, 2));
    CHECK(Rational(-1, 2) < Rational(1, 3));
    CHECK(Rational(2, 3) > Rational(1, 2));
    CHECK(Rational(7, 7) == Rational(1));
    // Values near the int64 boundary still compare correctly.
    std::int64_t big = std::int64_t(1) << 62;
    CHECK(Rational(big, 1) > Rational(big - 1, 1));
    CHECK(Rational(1, big) > Rational(0));
}

TEST_CASE("overflow in intermediates is detected, not wrapped") {
    Rational huge((std::int64_t(1) << 62), 1);
    CHECK_THROWS_AS(huge * huge, std::overflow_error);
    CHECK_THROWS_AS(huge + huge, std::overflow_error);
    // gcd reduction keeps representable results legal
    Rational x(std::int64_t(1) << 40, 3);
    Rational y(3, std::int64_t(1) << 40);
    CHECK((x * y).is_one());
}

TEST_CASE("string form") {
    CHECK(Rational(3).str() == "3");
    CHECK(Rational(-3).str() == "-3");
    CHECK(Rational(1, 2).str() == "1/2");
    CHECK(Rational(-1, 2).str() == "-1/2");
}

TEST_CASE("randomized field laws") {
    std::mt19937_64 rng(20240817);
    std::uniform_int_distribution<std::int64_t> num(-50, 50), den(1, 50);
    for (int i = 0; i < 500; ++i) {
        Rational a(num(rng), den(rng)), b(num(rng), den(rng)), c(num(rng), den(rng));
        CHECK(a + b == b + a);
        CHECK(a * b == b * a);
        CHECK((a + b) + c == a + (b + c));
        CHECK(a * (b + c) == a * b + a * c);
        if (!b.is_zero()) CHECK((a / b) * b == a);
        CHECK(spalps::rational_min(a, b) == (a < b ? a : b));
    }
}

TEST_CASE("double conversion is the IEEE quotient") {
    CHECK(Rational(1, 2).to_double() == 0.5);
    CHECK(Rational(1, 4).to_double() == 0.25);
    CHECK(Rational(1, 3).to_double() == 1.0 / 3.0);
}
