#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "clrt/integrator.hpp"
#include "clrt/linalg.hpp"
#include "clrt/systems.hpp"

namespace clrt {

// Closed metric ball B_M(c, r) = { x : ||A (x - c)||_2 <= r } whose center is
// known only up to the enclosure center_box.
struct Ball {
    IVector center_box;
    Metric metric;
    double radius = 0.0;

    int dim() const { return static_cast<int>(center_box.size()); }
};

// True when ||p - c||_M <= radius + tol could hold for at least one
// admissible center c, i.e. fails only when p is certainly outside the ball
// of every center.  This is the predicate for checking claimed containment
// of a point known to be reachable.
bool ball_may_contain(const Ball& b, const Vec& p, double tol = 0.0);

// True when ||p - c||_M <= radius holds for every admissible center; the
// predicate to use before asserting that p is covered no matter which center
// is the true one.
bool ball_contains_for_all_centers(const Ball& b, const Vec& p);

// Axis-aligned interval hull of the ball: center_box + A^{-1} applied to the
// cube [-radius, radius]^n, evaluated in interval arithmetic.
IVector ball_to_box(const Ball& b);

// Deformation measures of a gradient enclosure.
struct StrainTensors {
    IMatrix C;          // right Cauchy-Green tensor F^T F
    IMatrix E;          // Green-Lagrange strain (C - I)/2
    IMatrix disp_grad;  // displacement gradient F - I
    IMatrix eps_inf;    // infinitesimal strain, symmetric part of disp_grad
    IMatrix omega;      // infinitesimal rotation, antisymmetric part
};

StrainTensors strain_tensors(const IMatrix& f);

// One time step of the reachtube: the continuous ball covers every state
// reachable during [t_lo, t_hi], the discrete ball covers the reachable set
// at exactly t_hi.
struct TubeSegment {
    double t_lo = 0.0;
    double t_hi = 0.0;
    Ball continuous;
    Ball discrete_end;
    double lambda = 0.0;  // stretching-factor bound used for this step
    double h = 0.0;
};

struct ClrtConfig {
    double t0 = 0.0;
    double T = 1.0;
    int k = 100;            // initial step count; the first trial step is T/k
    double eps_ist = 0.1;   // strain threshold for accepting a step
    double c_delta = 1.1;   // growth factor of the bloating loops, > 1
    double c_m = 1.5;       // metric-switch threshold
    // Largest eigenbasis condition number a switch candidate may have; above
    // it the incoming metric is kept.  A skewed basis can look cheap for one
    // step while every later change of basis pays its condition number back,
    // so benchmarks with recurring near-defective gradients cap it.  Infinity
    // (the default) disables the gate.
    double switch_cond_cap = std::numeric_limits<double>::infinity();
    Metric M0{};
    IVector x0_box;         // enclosure of the initial ball center
    double delta0 = 0.0;    // initial ball radius in the M0 norm
    IntegratorOptions integrator;

    // Bloating / branch-and-prune knobs.
    double bloat_cap_factor = 1e3;   // BloatDiverged beyond cap * delta0
    double eps_sat_rel = 1e-9;       // relative eps-weakening of the SAT query
    int prune_max_depth = 60;
    long prune_box_budget = 1000000;
    double time_split_weight = 1.0;  // time-axis scale in the widest-dim rule
    int refine_bisections = 3;       // bisection polish of the certified bound
    bool keep_outer_trial = false;   // report the outer trial radius instead
                                     // of the tighter certified delta0 + tilde
    unsigned estimator_seed = 2026;  // multi-start ascent seed
    double h_floor_factor = 1e-12;   // StepUnderflow below factor * T
    std::ostream* prune_dump = nullptr;  // one JSON line per explored box

    // Throws ConfigError naming the offending field.
    void validate() const;
};

// Result of the incremental-strain step control: the accepted step size, the
// gradient enclosure valid over all of [t0, t0+h], and the flow step over
// the ball's hull box it came from (reused by advance).
struct IstResult {
    double h = 0.0;
    IMatrix grad_interval;
    FlowStep ball_step;
};

// Halve h0 until the displacement-gradient enclosure over the whole step has
// spectral-norm bound below cfg.eps_ist.  Throws StepUnderflow at the floor.
IstResult ist_adapt(const OdeSystem& sys, double t0, double h0, const Ball& ball,
                    const ClrtConfig& cfg);

// Upper bound, valid for every F in f_box, on how far an m0-unit ball is
// stretched when mapped by F and measured in m1: the spectral-norm bound of
// A1 * f_box * A0^{-1}.
double stretching_factor(const IMatrix& f_box, const Metric& m0, const Metric& m1);

// The metric in which the stretching factor of f_mid is exactly its largest
// eigenvalue modulus: built from the real block-diagonalizing eigenbasis.
// Throws RankDeficient / NearDefective when f_mid has no usable basis.
Metric optimal_metric(const Mat& f_mid);

// Switch rule: adopt the candidate metric iff keeping the old one costs more
// than c_m times the candidate's own stretching factor.
bool metric_switch(double lambda_keep, double lambda_new, double c_m);

// Upper bound on the finite-time Lyapunov exponent ln(lambda)/t_horizon.
double ftle_bound(double lambda, double t_horizon);

struct AdvanceResult {
    TubeSegment seg;
    Ball next_ball;
};

// One full reachtube step from (t, ball): strain-controlled step selection,
// flow and gradient enclosures, metric switch, discrete endpoint ball with
// radius lambda * radius, and the certified continuous radius.  Throws
// StepUnderflow / IntervalBlowup / BloatDiverged when the step cannot be
// completed; the caller keeps the tube built so far.
AdvanceResult advance(const OdeSystem& sys, double t, const Ball& ball, double h_try,
                      const ClrtConfig& cfg);

struct RunResult {
    std::vector<TubeSegment> segments;
    bool complete = false;
    std::string abort_reason;  // empty when complete
    double t_reached = 0.0;
};

// Drive advance from t0 to T.  Segments chain exactly (each t_hi is the next
// t_lo) and the last one reaches T; on an aborted step the partial tube is
// returned with complete = false and the reason recorded.
RunResult run(const OdeSystem& sys, const ClrtConfig& cfg);

} // namespace clrt
