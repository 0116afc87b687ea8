#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "clrt/errors.hpp"
#include "clrt/interval.hpp"
#include "clrt/ivec.hpp"
#include "support/hp.hpp"

using clrt::Interval;
using clrt::IMatrix;
using clrt::IVector;
using oracle::encloses;
using oracle::hp;

namespace {

double ulp_at(double v) {
    double m = std::abs(v);
    if (m < std::numeric_limits<double>::min()) m = std::numeric_limits<double>::min();
    return std::nextafter(m, std::numeric_limits<double>::infinity()) - m;
}

// Largest ulp over the interval's endpoints; used to budget widening.
double ulp_of(const Interval& iv) {
    return std::max(ulp_at(iv.lo), ulp_at(iv.hi));
}

} // namespace

TEST_CASE("interval construction validates its invariant") {
    CHECK_NOTHROW(Interval(1.0, 2.0));
    CHECK_NOTHROW(Interval(-3.5));
    CHECK_THROWS_AS(Interval(2.0, 1.0), clrt::DomainError);
    CHECK_THROWS_AS(Interval(std::nan(""), 1.0), clrt::NonFiniteEntry);
    CHECK_THROWS_AS(Interval(0.0, std::nan("")), clrt::NonFiniteEntry);
}

TEST_CASE("exact endpoint arithmetic stays exact") {
    Interval r = Interval(1.0, 2.0) + Interval(3.0, 4.0);
    CHECK(r.lo == 4.0);
    CHECK(r.hi == 6.0);

    Interval s = Interval(1.0, 2.0) - Interval(0.5, 1.5);
    CHECK(s.lo == -0.5);
    CHECK(s.hi == 1.5);

    Interval p = Interval(-3.0, 2.0) * Interval(4.0);
    CHECK(p.lo == -12.0);
    CHECK(p.hi == 8.0);

    Interval q = Interval(1.0, 3.0) / Interval(2.0);
    CHECK(q.lo == 0.5);
    CHECK(q.hi == 1.5);
}

TEST_CASE("inexact endpoints are rounded outward") {
    Interval r = Interval(0.1) * Interval(0.3);
    hp truth = hp(0.1) * hp(0.3);
    CHECK(encloses(r, truth));
    CHECK(r.lo < r.hi); // rounding must widen, not collapse

    Interval s = Interval(0.1) + Interval(0.2);
    CHECK(encloses(s, hp(0.1) + hp(0.2)));
    CHECK(s.hi - s.lo <= 2 * ulp_of(s));
}

TEST_CASE("binary ops enclose the true range endpoints") {
    std::mt19937_64 rng(20240901);
    for (int it = 0; it < 20000; ++it) {
        Interval a = oracle::rand_interval(rng, -50, 50);
        Interval b = oracle::rand_interval(rng, -50, 50);

        Interval sum = a + b;
        CHECK(encloses(sum, hp(a.lo) + hp(b.lo)));
        CHECK(encloses(sum, hp(a.hi) + hp(b.hi)));

        Interval dif = a - b;
        CHECK(encloses(dif, hp(a.lo) - hp(b.hi)));
        CHECK(encloses(dif, hp(a.hi) - hp(b.lo)));

        Interval prd = a * b;
        for (double x : {a.lo, a.hi}) {
            for (double y : {b.lo, b.hi}) {
                CHECK(encloses(prd, hp(x) * hp(y)));
            }
        }

        if (!clrt::contains(b, 0.0)) {
            Interval quo = a / b;
            for (double x : {a.lo, a.hi}) {
                for (double y : {b.lo, b.hi}) {
                    CHECK(encloses(quo, hp(x) / hp(y)));
                }
            }
        }
    }
}

TEST_CASE("inclusion isotonicity holds across all ops") {
    std::mt19937_64 rng(77001);
    for (int it = 0; it < 10000; ++it) {
        Interval a = oracle::rand_interval(rng, -20, 20);
        Interval b = oracle::rand_interval(rng, 0.5, 20); // safe for div/sqrt/log
        // Shrink both toward their midpoints.
        auto shrink = [&](const Interval& iv) {
            double m = clrt::mid(iv);
            double f = oracle::uniform(rng, 0.0, 1.0);
            return Interval(m + f * (iv.lo - m), m + f * (iv.hi - m));
        };
        Interval as = shrink(a);
        Interval bs = shrink(b);

        CHECK(clrt::contains(a + b, as + bs));
        CHECK(clrt::contains(a - b, as - bs));
        CHECK(clrt::contains(a * b, as * bs));
        CHECK(clrt::contains(a / b, as / bs));
        CHECK(clrt::contains(clrt::sqrt(b), clrt::sqrt(bs)));
        CHECK(clrt::contains(clrt::log(b), clrt::log(bs)));
        CHECK(clrt::contains(clrt::exp(a * Interval(0.1)), clrt::exp(as * Interval(0.1))));
        CHECK(clrt::contains(clrt::sin(a), clrt::sin(as)));
        CHECK(clrt::contains(clrt::cos(a), clrt::cos(as)));
        CHECK(clrt::contains(clrt::powi(a, 3), clrt::powi(as, 3)));
    }
}

TEST_CASE("transcendentals enclose high-precision samples") {
    std::mt19937_64 rng(4242);
    for (int it = 0; it < 4000; ++it) {
        Interval a = oracle::rand_interval(rng, -30, 30);
        Interval pos = oracle::rand_interval(rng, 1e-3, 30);

        Interval s = clrt::sin(a);
        Interval c = clrt::cos(a);
        Interval e = clrt::exp(a * Interval(0.05));
        Interval sq = clrt::sqrt(pos);
        Interval lg = clrt::log(pos);

        for (double x : oracle::sample_points(a)) {
            CHECK(encloses(s, sin(hp(x))));
            CHECK(encloses(c, cos(hp(x))));
            CHECK(encloses(e, exp(hp(x) * hp(0.05))));
        }
        for (double x : oracle::sample_points(pos)) {
            CHECK(encloses(sq, sqrt(hp(x))));
            CHECK(encloses(lg, log(hp(x))));
        }
        CHECK(s.lo >= -1.0);
        CHECK(s.hi <= 1.0);
        CHECK(c.lo >= -1.0);
        CHECK(c.hi <= 1.0);
        CHECK(e.lo >= 0.0);
    }
}

TEST_CASE("sin and cos detect interior extrema") {
    Interval s = clrt::sin(Interval(0.0, clrt::pi_interval().hi));
    CHECK(s.hi == 1.0);                 // pi/2 lies inside
    CHECK(s.lo <= 0.0);                 // attained at the left endpoint
    CHECK(s.lo >= -1e-12);

    Interval c = clrt::cos(Interval(-0.1, 0.1)); // 0 = arg max of cos inside
    CHECK(c.hi == 1.0);
    CHECK(encloses(c, cos(hp(0.1))));

    // Once the width covers a full period, the only sound answer is [-1, 1].
    Interval wide = clrt::sin(Interval(100.0, 200.0));
    CHECK(wide.lo == -1.0);
    CHECK(wide.hi == 1.0);

    // Far from any extremum the bounds follow the monotone piece.
    Interval mono = clrt::sin(Interval(0.1, 0.2));
    CHECK(mono.lo > 0.09);
    CHECK(mono.hi < 0.2);
}

TEST_CASE("degenerate inputs stay within a couple of ulps") {
    std::mt19937_64 rng(99);
    for (int it = 0; it < 2000; ++it) {
        double x = oracle::uniform(rng, -10, 10);
        double y = oracle::uniform(rng, 0.5, 10);
        Interval xs(x), ys(y);

        CHECK((xs + ys).hi - (xs + ys).lo <= 2 * ulp_of(xs + ys));
        CHECK((xs * ys).hi - (xs * ys).lo <= 2 * ulp_of(xs * ys));
        CHECK((xs / ys).hi - (xs / ys).lo <= 2 * ulp_of(xs / ys));

        Interval s = clrt::sin(xs);
        CHECK(s.hi - s.lo <= 4 * ulp_of(Interval(1.0)));
        Interval e = clrt::exp(Interval(0.1) * xs);
        CHECK(e.hi - e.lo <= 6 * ulp_of(e));
    }
}

TEST_CASE("integer powers use the even/odd monotone split") {
    Interval sq = clrt::powi(Interval(-1.0, 2.0), 2);
    CHECK(sq.lo == 0.0);
    CHECK(sq.hi == 4.0);
    // The naive product cannot see the dependency and keeps the sign error.
    Interval naive = Interval(-1.0, 2.0) * Interval(-1.0, 2.0);
    CHECK(naive.lo == -2.0);

    Interval cube = clrt::powi(Interval(-2.0, -1.0), 3);
    CHECK(cube.lo == -8.0);
    CHECK(cube.hi == -1.0);

    CHECK(clrt::powi(Interval(3.0), 0).lo == 1.0);
    CHECK(clrt::powi(Interval(3.0), 1).hi == 3.0);
    CHECK_THROWS_AS(clrt::powi(Interval(1.0), -1), clrt::DomainError);

    std::mt19937_64 rng(515);
    for (int it = 0; it < 3000; ++it) {
        Interval a = oracle::rand_interval(rng, -5, 5);
        int n = std::uniform_int_distribution<int>(0, 6)(rng);
        Interval p = clrt::powi(a, n);
        for (double x : oracle::sample_points(a)) {
            CHECK(encloses(p, pow(hp(x), n)));
        }
    }
}

TEST_CASE("domain violations raise instead of clamping") {
    CHECK_THROWS_AS(clrt::sqrt(Interval(-1e-300, 1.0)), clrt::DomainError);
    CHECK_THROWS_AS(clrt::log(Interval(0.0, 1.0)), clrt::DomainError);
    CHECK_THROWS_AS(Interval(1.0, 2.0) / Interval(-1.0, 1.0), clrt::DivisionByZeroInterval);
    CHECK_THROWS_AS(Interval(1.0, 2.0) / Interval(0.0, 1.0), clrt::DivisionByZeroInterval);
    CHECK_NOTHROW(clrt::sqrt(Interval(0.0, 4.0)));
}

TEST_CASE("sqrt is exact on exact squares") {
    Interval r = clrt::sqrt(Interval(0.0, 4.0));
    CHECK(r.lo == 0.0);
    CHECK(r.hi == 2.0);
}

TEST_CASE("abs, hull, mid, rad, width, containment") {
    using namespace clrt;
    CHECK(abs(Interval(-3.0, 2.0)).lo == 0.0);
    CHECK(abs(Interval(-3.0, 2.0)).hi == 3.0);
    CHECK(abs(Interval(-3.0, -1.0)).lo == 1.0);

    Interval h = hull(Interval(1.0, 2.0), Interval(5.0, 6.0));
    CHECK(h.lo == 1.0);
    CHECK(h.hi == 6.0);

    CHECK(mid(Interval(1.0, 3.0)) == 2.0);
    CHECK(rad(Interval(1.0, 3.0)) == 1.0);
    CHECK(width(Interval(1.0, 3.0)) == 2.0);

    CHECK(contains(Interval(1.0, 4.0), Interval(2.0, 3.0)));
    CHECK(!contains(Interval(1.0, 4.0), Interval(2.0, 5.0)));
    CHECK(contains(Interval(1.0, 4.0), 4.0));
    CHECK(intersects(Interval(1.0, 2.0), Interval(2.0, 3.0)));
    CHECK(!intersects(Interval(1.0, 2.0), Interval(2.5, 3.0)));

    auto isec = intersect(Interval(1.0, 3.0), Interval(2.0, 5.0));
    REQUIRE(isec.has_value());
    CHECK(isec->lo == 2.0);
    CHECK(isec->hi == 3.0);
    CHECK(!intersect(Interval(1.0, 2.0), Interval(3.0, 4.0)).has_value());

    // mid/rad always re-covers the interval, even at ulp asymmetry.
    std::mt19937_64 rng(313);
    for (int it = 0; it < 5000; ++it) {
        Interval a = oracle::rand_interval(rng, -1e8, 1e8);
        double m = mid(a);
        double r = rad(a);
        CHECK(contains(a, m));
        CHECK(m - r <= a.lo);
        CHECK(m + r >= a.hi);
    }
}

TEST_CASE("pi enclosure brackets the true constant") {
    CHECK(encloses(clrt::pi_interval(),
                   hp("3.14159265358979323846264338327950288419716939937510")));
    CHECK(clrt::pi_interval().hi - clrt::pi_interval().lo <= 2 * ulp_at(3.14159));
}

TEST_CASE("identity matvec does not widen") {
    IMatrix id = IMatrix::identity(3);
    IVector x(3);
    x[0] = Interval(1.25, 2.5);
    x[1] = Interval(-0.375);
    x[2] = Interval(0.0, 1e-3);
    IVector y = matvec(id, x);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(y[i].lo == x[i].lo);
        CHECK(y[i].hi == x[i].hi);
    }
}

TEST_CASE("matvec and matmul enclose high-precision point products") {
    std::mt19937_64 rng(808);
    for (int it = 0; it < 300; ++it) {
        IMatrix a(3, 3);
        IMatrix b(3, 3);
        IVector v(3);
        for (std::size_t i = 0; i < 9; ++i) {
            a.e[i] = oracle::rand_interval(rng, -4, 4);
            b.e[i] = oracle::rand_interval(rng, -4, 4);
        }
        for (std::size_t i = 0; i < 3; ++i) v[i] = oracle::rand_interval(rng, -4, 4);

        // Sample point selections (entries are independent, so any works).
        for (int trial = 0; trial < 8; ++trial) {
            auto pick = [&](const Interval& iv) {
                return oracle::uniform(rng, iv.lo, iv.hi);
            };
            std::array<hp, 9> ap, bp;
            std::array<hp, 3> vp;
            for (std::size_t i = 0; i < 9; ++i) {
                ap[i] = hp(pick(a.e[i]));
                bp[i] = hp(pick(b.e[i]));
            }
            for (std::size_t i = 0; i < 3; ++i) vp[i] = hp(pick(v[i]));

            IVector mv = matvec(a, v);
            for (std::size_t i = 0; i < 3; ++i) {
                hp s = 0;
                for (std::size_t j = 0; j < 3; ++j) s += ap[3 * i + j] * vp[j];
                CHECK(encloses(mv[i], s));
            }

            IMatrix mm = matmul(a, b);
            for (std::size_t i = 0; i < 3; ++i) {
                for (std::size_t j = 0; j < 3; ++j) {
                    hp s = 0;
                    for (std::size_t k = 0; k < 3; ++k) s += ap[3 * i + k] * bp[3 * k + j];
                    CHECK(encloses(mm.at(i, j), s));
                }
            }
        }
    }
}

TEST_CASE("matrix helpers respect shapes") {
    IMatrix a(2, 3);
    IVector v(2);
    CHECK_THROWS_AS(matvec(a, v), clrt::DimensionMismatch);
    IMatrix b(2, 2);
    CHECK_THROWS_AS(matmul(a, b), clrt::DimensionMismatch);

    IMatrix t = transpose(a);
    CHECK(t.rows() == 3);
    CHECK(t.cols() == 2);
}

TEST_CASE("interval vectors and matrices hull and contain entrywise") {
    IVector a(2), b(2);
    a[0] = Interval(0.0, 1.0);
    a[1] = Interval(2.0);
    b[0] = Interval(0.5, 2.0);
    b[1] = Interval(1.0);
    IVector h = hull(a, b);
    CHECK(h[0].lo == 0.0);
    CHECK(h[0].hi == 2.0);
    CHECK(h[1].lo == 1.0);
    CHECK(contains(h, a));
    CHECK(contains(h, b));
    CHECK(!contains(a, b));
}
