#pragma once

#include <cmath>
#include <limits>
#include <optional>

#include "clrt/errors.hpp"

namespace clrt {

// Closed interval [lo, hi] of reals, endpoints stored as doubles.  Every
// operation returns an interval that contains the exact real-valued image of
// its operands; bounds are pushed outward whenever a rounding step may have
// been inexact.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    Interval() = default;

    Interval(double v) : lo(v), hi(v) {
        if (std::isnan(v)) throw NonFiniteEntry("interval endpoint is NaN");
    }

    Interval(double a, double b) : lo(a), hi(b) {
        if (std::isnan(a) || std::isnan(b)) {
            throw NonFiniteEntry("interval endpoint is NaN");
        }
        if (a > b) throw DomainError("interval bounds inverted");
    }

    // Internal: endpoints already validated by the caller.
    static Interval raw(double a, double b) {
        Interval r;
        r.lo = a;
        r.hi = b;
        return r;
    }
};

namespace detail {

// ---------------------------------------------------------------------------
// All directed rounding lives here.  Doubles are computed in the default
// round-to-nearest mode and endpoints are stepped outward with nextafter;
// a round-to-nearest result is within half an ulp of the true value, so one
// step is always enough for the IEEE core operations.  Where the residual of
// an operation is representable (add/sub/mul/div/sqrt, via fma and TwoSum) we
// recover the exact rounding direction and only step when truly needed, which
// keeps integer and power-of-two arithmetic exact.  libm calls get a fixed
// two-ulp pad instead, covering their documented worst-case error.
// ---------------------------------------------------------------------------

inline double next_up(double x) {
    return std::nextafter(x, std::numeric_limits<double>::infinity());
}

inline double next_down(double x) {
    return std::nextafter(x, -std::numeric_limits<double>::infinity());
}

// TwoSum: e is the exact error of s = a + b (Knuth; valid for all inputs
// barring overflow, where the infinite endpoint already dominates).
inline double add_err(double a, double b, double s) {
    double bp = s - a;
    double ap = s - bp;
    return (a - ap) + (b - bp);
}

inline double add_down(double a, double b) {
    double s = a + b;
    if (!std::isfinite(s)) return s == std::numeric_limits<double>::infinity()
                                      ? std::numeric_limits<double>::max()
                                      : s;
    return add_err(a, b, s) >= 0.0 ? s : next_down(s);
}

inline double add_up(double a, double b) {
    double s = a + b;
    if (!std::isfinite(s)) return s == -std::numeric_limits<double>::infinity()
                                      ? -std::numeric_limits<double>::max()
                                      : s;
    return add_err(a, b, s) <= 0.0 ? s : next_up(s);
}

inline double sub_down(double a, double b) { return add_down(a, -b); }
inline double sub_up(double a, double b) { return add_up(a, -b); }

// Product residual is exact via fma unless the result is (sub)normal-tiny,
// in which case we step unconditionally.
inline bool prod_residual_ok(double p) {
    double m = std::abs(p);
    return std::isfinite(p) && (m == 0.0 || m >= 1e-290);
}

inline double mul_down(double a, double b) {
    if (a == 0.0 || b == 0.0) return 0.0;
    double p = a * b;
    if (!prod_residual_ok(p)) {
        return std::isfinite(p) ? next_down(p)
                                : (p > 0 ? std::numeric_limits<double>::max() : p);
    }
    double r = std::fma(a, b, -p); // true product = p + r
    return r >= 0.0 ? p : next_down(p);
}

inline double mul_up(double a, double b) {
    if (a == 0.0 || b == 0.0) return 0.0;
    double p = a * b;
    if (!prod_residual_ok(p)) {
        return std::isfinite(p) ? next_up(p)
                                : (p < 0 ? -std::numeric_limits<double>::max() : p);
    }
    double r = std::fma(a, b, -p);
    return r <= 0.0 ? p : next_up(p);
}

inline double div_down(double a, double b) {
    double q = a / b;
    if (!std::isfinite(q) || !prod_residual_ok(q)) {
        return std::isfinite(q) ? next_down(q) : q;
    }
    double r = std::fma(q, b, -a); // a - q*b = -r, true q - q = -r/b
    if (r == 0.0) return q;
    bool true_below = (b > 0.0) ? (r > 0.0) : (r < 0.0);
    return true_below ? next_down(q) : q;
}

inline double div_up(double a, double b) {
    double q = a / b;
    if (!std::isfinite(q) || !prod_residual_ok(q)) {
        return std::isfinite(q) ? next_up(q) : q;
    }
    double r = std::fma(q, b, -a);
    if (r == 0.0) return q;
    bool true_above = (b > 0.0) ? (r < 0.0) : (r > 0.0);
    return true_above ? next_up(q) : q;
}

inline double sqrt_down(double x) {
    double s = std::sqrt(x);
    double r = std::fma(s, s, -x); // s*s - x; exact for normal-range s
    return r <= 0.0 ? s : next_down(s);
}

inline double sqrt_up(double x) {
    double s = std::sqrt(x);
    double r = std::fma(s, s, -x);
    return r >= 0.0 ? s : next_up(s);
}

// Fixed outward pad for libm results (sin/cos/exp/log are faithful but not
// correctly rounded; two ulps covers their worst documented error).
inline double lib_down(double v) { return next_down(next_down(v)); }
inline double lib_up(double v) { return next_up(next_up(v)); }

} // namespace detail

// --- constants ---------------------------------------------------------------

// Tightest double bracket of pi: the stored double is below the true value.
inline Interval pi_interval() {
    constexpr double pi_lo = 0x1.921fb54442d18p+1;
    return Interval::raw(pi_lo, detail::next_up(pi_lo));
}

inline Interval two_pi_interval() {
    Interval p = pi_interval();
    return Interval::raw(detail::mul_down(p.lo, 2.0), detail::mul_up(p.hi, 2.0));
}

// --- arithmetic --------------------------------------------------------------

inline Interval operator+(const Interval& a, const Interval& b) {
    return Interval::raw(detail::add_down(a.lo, b.lo), detail::add_up(a.hi, b.hi));
}

inline Interval operator-(const Interval& a, const Interval& b) {
    return Interval::raw(detail::sub_down(a.lo, b.hi), detail::sub_up(a.hi, b.lo));
}

inline Interval operator-(const Interval& a) {
    return Interval::raw(-a.hi, -a.lo);
}

inline Interval operator*(const Interval& a, const Interval& b) {
    using detail::mul_down;
    using detail::mul_up;
    double lo = mul_down(a.lo, b.lo);
    double hi = mul_up(a.lo, b.lo);
    for (auto [x, y] : {std::pair{a.lo, b.hi}, {a.hi, b.lo}, {a.hi, b.hi}}) {
        lo = std::min(lo, mul_down(x, y));
        hi = std::max(hi, mul_up(x, y));
    }
    return Interval::raw(lo, hi);
}

inline Interval operator/(const Interval& a, const Interval& b) {
    if (b.lo <= 0.0 && b.hi >= 0.0) {
        throw DivisionByZeroInterval("denominator interval contains zero");
    }
    using detail::div_down;
    using detail::div_up;
    double lo = div_down(a.lo, b.lo);
    double hi = div_up(a.lo, b.lo);
    for (auto [x, y] : {std::pair{a.lo, b.hi}, {a.hi, b.lo}, {a.hi, b.hi}}) {
        lo = std::min(lo, div_down(x, y));
        hi = std::max(hi, div_up(x, y));
    }
    return Interval::raw(lo, hi);
}

inline Interval& operator+=(Interval& a, const Interval& b) { return a = a + b; }
inline Interval& operator-=(Interval& a, const Interval& b) { return a = a - b; }
inline Interval& operator*=(Interval& a, const Interval& b) { return a = a * b; }

// --- set helpers -------------------------------------------------------------

inline Interval hull(const Interval& a, const Interval& b) {
    return Interval::raw(std::min(a.lo, b.lo), std::max(a.hi, b.hi));
}

inline double mid(const Interval& a) {
    if (a.lo == -std::numeric_limits<double>::infinity() ||
        a.hi == std::numeric_limits<double>::infinity()) {
        return 0.0;
    }
    double m = 0.5 * (a.lo + a.hi);
    if (!std::isfinite(m)) m = 0.5 * a.lo + 0.5 * a.hi;
    return std::min(std::max(m, a.lo), a.hi);
}

// Radius r such that [mid - r, mid + r] covers the interval.
inline double rad(const Interval& a) {
    double m = mid(a);
    return std::max(detail::sub_up(a.hi, m), detail::sub_up(m, a.lo));
}

inline double width(const Interval& a) {
    return detail::sub_up(a.hi, a.lo);
}

inline bool contains(const Interval& a, double x) {
    return a.lo <= x && x <= a.hi;
}

inline bool contains(const Interval& a, const Interval& b) {
    return a.lo <= b.lo && b.hi <= a.hi;
}

inline bool intersects(const Interval& a, const Interval& b) {
    return a.lo <= b.hi && b.lo <= a.hi;
}

inline std::optional<Interval> intersect(const Interval& a, const Interval& b) {
    double lo = std::max(a.lo, b.lo);
    double hi = std::min(a.hi, b.hi);
    if (lo > hi) return std::nullopt;
    return Interval::raw(lo, hi);
}

inline Interval abs(const Interval& a) {
    if (a.lo >= 0.0) return a;
    if (a.hi <= 0.0) return Interval::raw(-a.hi, -a.lo);
    return Interval::raw(0.0, std::max(-a.lo, a.hi));
}

// --- elementary functions ----------------------------------------------------

inline Interval sqrt(const Interval& a) {
    if (a.lo < 0.0) {
        throw DomainError("sqrt of an interval reaching below zero");
    }
    return Interval::raw(std::max(0.0, detail::sqrt_down(a.lo)),
                         detail::sqrt_up(a.hi));
}

inline Interval exp(const Interval& a) {
    double lo = std::max(0.0, detail::lib_down(std::exp(a.lo)));
    double hi = detail::lib_up(std::exp(a.hi));
    if (!std::isfinite(hi)) hi = std::numeric_limits<double>::infinity();
    return Interval::raw(lo, hi);
}

inline Interval log(const Interval& a) {
    if (a.lo <= 0.0) {
        throw DomainError("log of an interval reaching zero or below");
    }
    return Interval::raw(detail::lib_down(std::log(a.lo)),
                         detail::lib_up(std::log(a.hi)));
}

// Integer powers via the even/odd monotone split; tighter than repeated
// multiplication because the base appears only once.
Interval powi(const Interval& a, int n);

// sin/cos locate possible interior extrema conservatively, then fall back to
// the monotone endpoint evaluation.
Interval sin(const Interval& a);
Interval cos(const Interval& a);

// --- mixed double convenience --------------------------------------------------

inline Interval operator+(const Interval& a, double b) { return a + Interval(b); }
inline Interval operator+(double a, const Interval& b) { return Interval(a) + b; }
inline Interval operator-(const Interval& a, double b) { return a - Interval(b); }
inline Interval operator-(double a, const Interval& b) { return Interval(a) - b; }
inline Interval operator*(const Interval& a, double b) { return a * Interval(b); }
inline Interval operator*(double a, const Interval& b) { return Interval(a) * b; }
inline Interval operator/(const Interval& a, double b) { return a / Interval(b); }
inline Interval operator/(double a, const Interval& b) { return Interval(a) / b; }

} // namespace clrt
