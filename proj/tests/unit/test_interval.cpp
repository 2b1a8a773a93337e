#include <doctest.h>

#include "tentshadow/error.hpp"
#include "tentshadow/interval.hpp"

using namespace tentshadow;

TEST_CASE("interval basics") {
    CHECK(Interval::spanning(0.7, 0.2) == Interval(0.2, 0.7));
    CHECK(Interval(0.2, 0.7).contains(0.2));
    CHECK_FALSE(Interval(0.2, 0.7).contains_interior(0.2));
    CHECK(Interval(0.2, 0.7).length() == doctest::Approx(0.5));
    CHECK_THROWS_AS(Interval(0.7, 0.2), ValidationError);
}

TEST_CASE("interval sets merge and sort") {
    IntervalSet s({{0.5, 0.6}, {0.1, 0.2}, {0.15, 0.3}, {0.6, 0.65}}, 16);
    REQUIRE(s.size() == 2);
    CHECK(s.parts()[0] == Interval(0.1, 0.3));
    CHECK(s.parts()[1] == Interval(0.5, 0.65));
    CHECK(s.measure() == doctest::Approx(0.35));
    CHECK(s.largest() == Interval(0.1, 0.3));
    CHECK(s.contains(0.55));
    CHECK_FALSE(s.contains(0.4));
}

TEST_CASE("interval set intersection") {
    IntervalSet s({{0.1, 0.3}, {0.5, 0.65}}, 16);
    auto cut = s.intersect(Interval(0.2, 0.55));
    REQUIRE(cut.size() == 2);
    CHECK(cut.parts()[0] == Interval(0.2, 0.3));
    CHECK(cut.parts()[1] == Interval(0.5, 0.55));
    CHECK(s.intersect(Interval(0.35, 0.45)).empty());
}

TEST_CASE("interval set cap") {
    CHECK_THROWS_AS(IntervalSet({{0.0, 0.1}, {0.2, 0.3}, {0.4, 0.5}}, 2), NumericalError);
    CHECK_NOTHROW(IntervalSet({{0.0, 0.1}, {0.1, 0.3}, {0.3, 0.5}}, 1));
}
