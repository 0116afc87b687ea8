#include "clrt/interval.hpp"

namespace clrt {

namespace {

// Tight bracket of x^n for a scalar base, built from an exact-residual
// multiply chain.
Interval scalar_powi(double x, int n) {
    Interval r(1.0);
    Interval base = Interval::raw(x, x);
    for (int i = 0; i < n; ++i) r = r * base;
    return r;
}

// True when [a] may contain a point offset + 2*pi*k for some integer k.
// Computed with outward rounding, so it can only over-report.
bool may_contain_shifted_multiple(const Interval& a, const Interval& offset) {
    Interval k = (a - offset) / two_pi_interval();
    return std::floor(k.hi) >= std::ceil(k.lo);
}

} // namespace

Interval powi(const Interval& a, int n) {
    if (n < 0) throw DomainError("powi requires a non-negative exponent");
    if (n == 0) return Interval(1.0);
    if (n == 1) return a;
    if (n % 2 == 1) {
        return Interval::raw(scalar_powi(a.lo, n).lo, scalar_powi(a.hi, n).hi);
    }
    Interval m = abs(a);
    return Interval::raw(scalar_powi(m.lo, n).lo, scalar_powi(m.hi, n).hi);
}

Interval sin(const Interval& a) {
    if (!std::isfinite(a.lo) || !std::isfinite(a.hi) ||
        width(a) >= two_pi_interval().lo) {
        return Interval::raw(-1.0, 1.0);
    }
    Interval half_pi = pi_interval() * Interval(0.5);
    double hi;
    if (may_contain_shifted_multiple(a, half_pi)) {
        hi = 1.0;
    } else {
        hi = std::max(detail::lib_up(std::sin(a.lo)), detail::lib_up(std::sin(a.hi)));
        hi = std::min(hi, 1.0);
    }
    double lo;
    if (may_contain_shifted_multiple(a, -half_pi)) {
        lo = -1.0;
    } else {
        lo = std::min(detail::lib_down(std::sin(a.lo)),
                      detail::lib_down(std::sin(a.hi)));
        lo = std::max(lo, -1.0);
    }
    return Interval::raw(lo, hi);
}

Interval cos(const Interval& a) {
    if (!std::isfinite(a.lo) || !std::isfinite(a.hi) ||
        width(a) >= two_pi_interval().lo) {
        return Interval::raw(-1.0, 1.0);
    }
    double hi;
    if (may_contain_shifted_multiple(a, Interval(0.0))) {
        hi = 1.0;
    } else {
        hi = std::max(detail::lib_up(std::cos(a.lo)), detail::lib_up(std::cos(a.hi)));
        hi = std::min(hi, 1.0);
    }
    double lo;
    if (may_contain_shifted_multiple(a, pi_interval())) {
        lo = -1.0;
    } else {
        lo = std::min(detail::lib_down(std::cos(a.lo)),
                      detail::lib_down(std::cos(a.hi)));
        lo = std::max(lo, -1.0);
    }
    return Interval::raw(lo, hi);
}

} // namespace clrt
