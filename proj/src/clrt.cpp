#include "clrt/clrt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "clrt/bloat.hpp"

namespace clrt {

namespace {

// Step floor for the halving chains, relative to the horizon scale.
double step_floor(const ClrtConfig& cfg) {
    double span = std::max({std::abs(cfg.T), cfg.T - cfg.t0, 1e-300});
    return cfg.h_floor_factor * span;
}

} // namespace

void ClrtConfig::validate() const {
    if (!std::isfinite(t0) || !std::isfinite(T) || T < t0) {
        throw ConfigError("T must be finite and at least t0");
    }
    if (k <= 0) throw ConfigError("k must be positive");
    if (!(eps_ist > 0.0)) throw ConfigError("eps_ist must be positive");
    if (!(c_delta > 1.0)) throw ConfigError("c_delta must exceed 1");
    if (!(c_m > 0.0)) throw ConfigError("c_m must be positive");
    if (!(switch_cond_cap >= 1.0)) {
        throw ConfigError("switch_cond_cap must be at least 1");
    }
    if (!(delta0 > 0.0)) throw ConfigError("delta0 must be positive");
    if (M0.dim() <= 0) throw ConfigError("M0 metric is missing");
    if (static_cast<int>(x0_box.size()) != M0.dim()) {
        throw ConfigError("x0_box dimension does not match the M0 metric");
    }
    if (integrator.order < 2) throw ConfigError("integrator_order must be at least 2");
    if (!(bloat_cap_factor > 1.0)) throw ConfigError("bloat_cap_factor must exceed 1");
    if (!(eps_sat_rel > 0.0)) throw ConfigError("eps_sat_rel must be positive");
    if (prune_max_depth <= 0) throw ConfigError("prune_max_depth must be positive");
    if (prune_box_budget <= 0) throw ConfigError("prune_box_budget must be positive");
    if (!(time_split_weight > 0.0)) throw ConfigError("time_split_weight must be positive");
    if (refine_bisections < 0) throw ConfigError("refine_bisections must not be negative");
    if (!(h_floor_factor > 0.0)) throw ConfigError("h_floor_factor must be positive");
}

bool ball_may_contain(const Ball& b, const Vec& p, double tol) {
    Interval dist = weighted_norm(to_interval(p) - b.center_box, b.metric);
    return dist.lo <= b.radius + tol;
}

bool ball_contains_for_all_centers(const Ball& b, const Vec& p) {
    Interval dist = weighted_norm(to_interval(p) - b.center_box, b.metric);
    return dist.hi <= b.radius;
}

IVector ball_to_box(const Ball& b) {
    IVector cube(b.center_box.size());
    for (auto& c : cube.e) c = Interval(-b.radius, b.radius);
    return b.center_box + matvec(b.metric.A_inv, cube);
}

StrainTensors strain_tensors(const IMatrix& f) {
    check_same_size(f.rows(), f.cols(), "strain tensors");
    IMatrix id = IMatrix::identity(f.rows());
    Interval half(0.5);
    StrainTensors st;
    st.C = matmul(transpose(f), f);
    st.E = half * (st.C - id);
    st.disp_grad = f - id;
    st.eps_inf = half * (st.disp_grad + transpose(st.disp_grad));
    st.omega = half * (st.disp_grad - transpose(st.disp_grad));
    return st;
}

IstResult ist_adapt(const OdeSystem& sys, double t0, double h0, const Ball& ball,
                    const ClrtConfig& cfg) {
    if (!(h0 > 0.0) || !std::isfinite(h0)) {
        throw BadParameter("strain step control needs a positive trial step");
    }
    const double floor = step_floor(cfg);
    IVector box = ball_to_box(ball);
    IMatrix id = IMatrix::identity(box.size());
    double h = h0;
    while (h >= floor) {
        try {
            FlowStep st = enclose_step(sys, t0, h, box, cfg.integrator);
            IMatrix grad = enclose_gradient_over_interval(st, sys);
            if (spectral_norm_bound(grad - id) < cfg.eps_ist) {
                return IstResult{h, std::move(grad), std::move(st)};
            }
        } catch (const NoAprioriEnclosure&) {
            // step too large for any enclosure at all; halve just the same
        } catch (const IntervalBlowup&) {
        }
        h *= 0.5;
    }
    throw StepUnderflow("strain step control reached the floor " + std::to_string(floor) +
                        " without satisfying eps_ist = " + std::to_string(cfg.eps_ist));
}

double stretching_factor(const IMatrix& f_box, const Metric& m0, const Metric& m1) {
    check_same_size(f_box.rows(), f_box.cols(), "stretching factor gradient");
    check_same_size(static_cast<std::size_t>(m0.dim()), f_box.cols(),
                    "stretching factor start metric");
    check_same_size(static_cast<std::size_t>(m1.dim()), f_box.rows(),
                    "stretching factor end metric");
    for (const auto& v : f_box.e) {
        if (!std::isfinite(v.lo) || !std::isfinite(v.hi)) {
            throw NonFiniteEntry("stretching factor gradient entry");
        }
    }
    return spectral_norm_bound(matmul(to_interval(m1.A), matmul(f_box, m0.A_inv)));
}

Metric optimal_metric(const Mat& f_mid) {
    RealEigenbasis eb = real_eigenbasis(f_mid);
    double mx = 0.0;
    double mn = std::numeric_limits<double>::infinity();
    for (double m : eb.eig_moduli) {
        mx = std::max(mx, m);
        mn = std::min(mn, m);
    }
    if (!(mn > mx * 1e-13)) {
        throw RankDeficient("optimal metric needs a full-rank gradient");
    }
    return Metric::from_factor(eb.a_hat);
}

bool metric_switch(double lambda_keep, double lambda_new, double c_m) {
    return lambda_keep > c_m * lambda_new;
}

double ftle_bound(double lambda, double t_horizon) {
    return (log(Interval(lambda)) / Interval(t_horizon)).hi;
}

namespace {

// Collapse a freshly enclosed centre box onto its midpoint and absorb the
// enclosure width into the radius.  Left in place, the box would be wrapped
// by the axis-aligned enclosure again next step and the chain would grow
// exponentially even while the ball itself contracts.
Ball reanchor(const IVector& x1_box, Metric m, double radius) {
    IVector point = to_interval(mid_vec(x1_box));
    Interval slack = weighted_norm(x1_box - point, m);
    double r = (Interval(radius) + slack).hi;
    return Ball{std::move(point), std::move(m), r};
}

} // namespace

AdvanceResult advance(const OdeSystem& sys, double t, const Ball& ball, double h_try,
                      const ClrtConfig& cfg) {
    IstResult ist = ist_adapt(sys, t, h_try, ball, cfg);
    double h = ist.h;
    FlowStep ball_step = std::move(ist.ball_step);
    const double floor = step_floor(cfg);

    bool redo_ball = false;
    for (;;) {
        try {
            if (redo_ball) {
                ball_step = enclose_step(sys, t, h, ball_to_box(ball), cfg.integrator);
                redo_ball = false;
            }
            FlowStep center_step = enclose_step(sys, t, h, ball.center_box, cfg.integrator);

            double lam_keep = stretching_factor(ball_step.F_box, ball.metric, ball.metric);
            Metric m1 = ball.metric;
            double lam = lam_keep;
            try {
                Metric cand = optimal_metric(mid_mat(ball_step.F_box));
                Eigen::JacobiSVD<Mat> svd(cand.A);
                double cond = svd.singularValues()(0) /
                              svd.singularValues()(cand.A.rows() - 1);
                double lam_cand = stretching_factor(ball_step.F_box, cand, cand);
                if (cond <= cfg.switch_cond_cap &&
                    metric_switch(lam_keep, lam_cand, cfg.c_m)) {
                    m1 = cand;
                    lam = stretching_factor(ball_step.F_box, ball.metric, cand);
                }
            } catch (const NearDefective&) {
                // no usable eigenbasis at this gradient; keep the incoming metric
            } catch (const RankDeficient&) {
            }

            double delta1 = (Interval(lam) * Interval(ball.radius)).hi;
            Ball next = reanchor(center_step.x1_box, std::move(m1), delta1);

            BloatResult br = bloat_radius(sys, t, h, ball, cfg, Direction::Forward,
                                          cfg.prune_dump);
            TubeSegment seg;
            seg.t_lo = t;
            seg.t_hi = ball_step.t1;
            seg.continuous = Ball{ball.center_box, ball.metric, br.delta_big};
            seg.discrete_end = next;
            seg.lambda = lam;
            seg.h = h;
            return AdvanceResult{std::move(seg), std::move(next)};
        } catch (const BloatDiverged&) {
            // the step sweeps too far for any fixed-point radius; halve and
            // redo the enclosures (the strain test stays satisfied on nested
            // halves)
        } catch (const NoAprioriEnclosure&) {
            // the center box can lose its enclosure at a step the ball-wide
            // strain test accepted; treat it the same way
        } catch (const IntervalBlowup&) {
        }
        h *= 0.5;
        if (h < floor) {
            throw StepUnderflow("no admissible step above the floor");
        }
        redo_ball = true;
    }
}

RunResult run(const OdeSystem& sys, const ClrtConfig& cfg) {
    cfg.validate();
    RunResult out;
    out.t_reached = cfg.t0;
    if (cfg.T <= cfg.t0) {
        out.complete = true;
        return out;
    }

    const double h_cap = (cfg.T - cfg.t0) / cfg.k;
    double h_try = h_cap;
    Ball ball{cfg.x0_box, cfg.M0, cfg.delta0};
    double t = cfg.t0;

    while (t < cfg.T) {
        double h_goal = h_try;
        double remaining = cfg.T - t;
        if (remaining <= h_try * (1.0 + 1e-9)) {
            // Final step: stretch by ulps so the last t_hi reaches T exactly
            // instead of leaving a subnormal sliver.
            h_goal = remaining;
            while (t + h_goal < cfg.T) h_goal = detail::next_up(h_goal);
        }
        try {
            AdvanceResult step = advance(sys, t, ball, h_goal, cfg);
            out.segments.push_back(std::move(step.seg));
            ball = std::move(step.next_ball);
            t = out.segments.back().t_hi;
            out.t_reached = t;
            h_try = std::min(out.segments.back().h * 2.0, h_cap);
        } catch (const Error& e) {
            out.abort_reason = e.what();
            return out;
        }
    }
    out.complete = true;
    return out;
}

} // namespace clrt
