#include "clrt/integrator.hpp"

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "clrt/errors.hpp"
#include "clrt/linalg.hpp"

namespace clrt {

namespace {

Interval inv_int(int k) { return Interval(1.0) / Interval(static_cast<double>(k)); }

IVector scale(const IVector& v, const Interval& s) { return s * v; }

IMatrix to_matrix(const IVector& flat, int n) {
    IMatrix m(n, n);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) m.at(r, c) = flat[r * n + c];
    }
    return m;
}

bool all_finite(const IVector& v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i].lo) || !std::isfinite(v[i].hi)) return false;
    }
    return true;
}

// Midpoint-preserving inflation used while searching for a Picard fixpoint.
// Every component also gains a slice of the widest radius: near a nullcline
// the flow feeds width from fast components into slow ones faster than a
// purely proportional inflation can grow the slow side, and the iteration
// would chase its own tail.
IVector inflate(const IVector& v) {
    double rmax = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) rmax = std::max(rmax, rad(v[i]));
    IVector r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        double m = mid(v[i]);
        double rad2 = 2.0 * rad(v[i]) + 0.1 * rmax + 1e-16 * (1.0 + std::abs(m));
        r[i] = Interval(m - rad2, m + rad2);
    }
    return r;
}

// Per-component intersection; both arguments enclose the same true set, so an
// (unreachable) empty component falls back to the second argument.
IVector intersect_boxes(const IVector& a, const IVector& b) {
    IVector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        auto iv = intersect(a[i], b[i]);
        r[i] = iv ? *iv : b[i];
    }
    return r;
}

IMatrix intersect_boxes(const IMatrix& a, const IMatrix& b) {
    IMatrix r(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.e.size(); ++i) {
        auto iv = intersect(a.e[i], b.e[i]);
        r.e[i] = iv ? *iv : b.e[i];
    }
    return r;
}

// Sum of coeff[k] * s^k plus rem * s^{order+1}.
IVector taylor_sum(const std::vector<IVector>& coeff, const IVector& rem, const Interval& s) {
    IVector acc = coeff[0];
    for (std::size_t k = 1; k < coeff.size(); ++k) acc = acc + scale(coeff[k], powi(s, static_cast<int>(k)));
    return acc + scale(rem, powi(s, static_cast<int>(coeff.size())));
}

IMatrix taylor_sum(const std::vector<IMatrix>& coeff, const IMatrix& rem, const Interval& s) {
    IMatrix acc = coeff[0];
    for (std::size_t k = 1; k < coeff.size(); ++k) acc = acc + powi(s, static_cast<int>(k)) * coeff[k];
    return acc + powi(s, static_cast<int>(coeff.size())) * rem;
}

// First-order Picard enclosure: a box B with x0 + [0,h] f([t0,t1], B)
// contained in B proves every solution from x0_box stays in the returned
// (tightened) box for the whole step.
IVector picard_enclosure(const OdeSystem& sys, const Interval& tspan, double h,
                         const IVector& x0_box, const IntegratorOptions& opts) {
    Interval span01(0.0, h);
    IVector b = x0_box;
    for (int iter = 0; iter < opts.picard_max_iter; ++iter) {
        if (!all_finite(b)) break;
        IVector fb;
        try {
            fb = eval_f(sys, tspan, b);
        } catch (const Error&) {
            break; // f undefined on the candidate box
        }
        IVector next = x0_box + scale(fb, span01);
        if (!all_finite(next)) break;
        if (contains(b, next)) return next;
        b = inflate(hull(b, next));
    }
    throw NoAprioriEnclosure("no contracting enclosure for step h=" + std::to_string(h) +
                             " of " + sys.name);
}

// A-priori enclosure of the variational solution over the step: a Gronwall
// bound |V_ij| <= exp(h * |J|_inf), tightened by Picard passes of the linear
// variational equation.
IMatrix variational_apriori(const IMatrix& j_enc, double h, int n, const IntegratorOptions& opts) {
    using detail::add_up;
    using detail::mul_up;
    double norm_inf = 0.0;
    for (int r = 0; r < n; ++r) {
        double row = 0.0;
        for (int c = 0; c < n; ++c) row = add_up(row, abs(j_enc.at(r, c)).hi);
        norm_inf = std::max(norm_inf, row);
    }
    double bound = exp(Interval(mul_up(h, norm_inf))).hi;
    IMatrix w(n, n);
    for (auto& entry : w.e) entry = Interval(-bound, bound);

    IMatrix eye = IMatrix::identity(n);
    Interval span01(0.0, h);
    for (int pass = 0; pass < opts.picard_refine; ++pass) {
        IMatrix next = eye + span01 * matmul(j_enc, w);
        w = intersect_boxes(next, w);
    }
    return w;
}

} // namespace

FlowStep enclose_step(const OdeSystem& sys, double t0, double h, const IVector& x0_box,
                      const IntegratorOptions& opts) {
    if (h <= 0.0 || !std::isfinite(h)) throw BadParameter("step size must be positive");
    if (opts.order < 2) throw BadParameter("integrator order must be at least 2");
    check_same_size(static_cast<std::size_t>(sys.dim), x0_box.size(), "enclose_step box");
    const int n = sys.dim;
    const int p = opts.order;
    const double t1 = t0 + h;
    const Interval tspan(t0, t1);
    const Interval hh(h);
    const Interval span01(0.0, h);

    IVector apriori = picard_enclosure(sys, tspan, h, x0_box, opts);

    // Solution jets: tight (expanded at t0 from x0_box) and wide (expanded
    // over the whole step from the a-priori box, supplying the Lagrange
    // remainder coefficients).
    JetEvaluator jet_tight(sys.f);
    jet_tight.reset(Interval(t0), x0_box);
    std::vector<IVector> xc{x0_box};
    for (int k = 0; k < p; ++k) {
        IVector xk1 = scale(jet_tight.output_coeff(k), inv_int(k + 1));
        xc.push_back(xk1);
        jet_tight.push_state_coeff(xk1);
    }

    JetEvaluator jet_wide(sys.f);
    jet_wide.reset(tspan, apriori);
    std::vector<IVector> xcw{apriori};
    for (int k = 0; k <= p; ++k) {
        IVector xk1 = scale(jet_wide.output_coeff(k), inv_int(k + 1));
        xcw.push_back(xk1);
        jet_wide.push_state_coeff(xk1);
    }
    const IVector& x_rem = xcw[p + 1];

    FlowStep st;
    st.t0 = t0;
    st.t1 = t1;
    st.x0_box = x0_box;
    st.x1_box = taylor_sum(xc, x_rem, hh);
    st.apriori_box = intersect_boxes(taylor_sum(xc, x_rem, span01), apriori);

    // Variational jets over the same solution jets: V_{k+1} =
    // (sum_j J_j V_{k-j}) / (k+1) with V_0 = I.
    JetEvaluator jac_tight(sys.jac);
    jac_tight.reset(Interval(t0), x0_box);
    std::vector<IMatrix> jc{to_matrix(jac_tight.output_coeff(0), n)};
    for (int k = 1; k < p; ++k) {
        jac_tight.push_state_coeff(xc[k]);
        jc.push_back(to_matrix(jac_tight.output_coeff(k), n));
    }

    std::vector<IMatrix> vc{IMatrix::identity(n)};
    for (int k = 0; k < p; ++k) {
        IMatrix acc = matmul(jc[0], vc[k]);
        for (int j = 1; j <= k; ++j) acc = acc + matmul(jc[j], vc[k - j]);
        vc.push_back(inv_int(k + 1) * acc);
    }

    JetEvaluator jac_wide(sys.jac);
    jac_wide.reset(tspan, apriori);
    std::vector<IMatrix> jcw{to_matrix(jac_wide.output_coeff(0), n)};
    for (int k = 1; k <= p; ++k) {
        jac_wide.push_state_coeff(xcw[k]);
        jcw.push_back(to_matrix(jac_wide.output_coeff(k), n));
    }

    IMatrix w = variational_apriori(jcw[0], h, n, opts);
    std::vector<IMatrix> vcw{w};
    for (int k = 0; k <= p; ++k) {
        IMatrix acc = matmul(jcw[0], vcw[k]);
        for (int j = 1; j <= k; ++j) acc = acc + matmul(jcw[j], vcw[k - j]);
        vcw.push_back(inv_int(k + 1) * acc);
    }
    const IMatrix& v_rem = vcw[p + 1];

    st.F_box = taylor_sum(vc, v_rem, hh);
    st.F_interval = hull(intersect_boxes(taylor_sum(vc, v_rem, span01), w), st.F_box);

    // The ratio cap needs a nonzero baseline; degenerate boxes are instead
    // guarded by the finiteness check.
    double w0 = max_width(x0_box);
    double w1 = max_width(st.x1_box);
    if (!all_finite(st.x1_box) || (w0 > 0.0 && w1 > opts.width_cap_factor * w0)) {
        throw IntervalBlowup("step enclosure width " + std::to_string(w1) +
                             " exceeds the cap for " + sys.name);
    }
    return st;
}

IMatrix enclose_gradient_over_interval(const FlowStep& step, const OdeSystem& sys) {
    check_same_size(static_cast<std::size_t>(sys.dim), step.x0_box.size(),
                    "enclose_gradient_over_interval");
    return step.F_interval;
}

IVector flow_box(const OdeSystem& sys, double t0, double T, int n_steps,
                 const IVector& x0_box, const IntegratorOptions& opts) {
    if (T <= 0.0 || n_steps <= 0) throw BadParameter("flow_box needs T > 0 and n_steps > 0");
    const int n = sys.dim;
    const double h = T / n_steps;

    // Lohner representation X = c + Q r with an orthogonal-ish point basis Q,
    // reconditioned by QR after every step.
    Vec c = mid_vec(x0_box);
    Mat q = Mat::Identity(n, n);
    IVector r = x0_box - to_interval(c);

    double t = t0;
    for (int step = 0; step < n_steps; ++step) {
        IVector xhat = to_interval(c) + matvec(to_interval(q), r);
        FlowStep box_step = enclose_step(sys, t, h, xhat, opts);
        FlowStep centre_step = enclose_step(sys, t, h, to_interval(c), opts);

        IMatrix g = matmul(box_step.F_box, to_interval(q));
        Eigen::HouseholderQR<Mat> qr(mid_mat(g));
        Mat qn = qr.householderQ();
        IMatrix qn_inv = verified_inverse(qn);

        Vec c_next = mid_vec(centre_step.x1_box);
        IVector dev = centre_step.x1_box - to_interval(c_next);
        r = matvec(matmul(qn_inv, g), r) + matvec(qn_inv, dev);
        c = c_next;
        q = qn;
        t = box_step.t1;
    }
    return to_interval(c) + matvec(to_interval(q), r);
}

} // namespace clrt
