#pragma once

#include "clrt/ivec.hpp"
#include "clrt/systems.hpp"

namespace clrt {

struct IntegratorOptions {
    int order = 8;
    // x1 widths beyond width_cap_factor * width(x0) (plus a tiny absolute
    // floor for degenerate boxes) raise IntervalBlowup.
    double width_cap_factor = 1e3;
    int picard_max_iter = 30;
    int picard_refine = 3;
};

// One validated step: enclosures of the flow at t1, of the flow over all of
// [t0, t1], and of the flow gradient (endpoint and whole-interval).
struct FlowStep {
    double t0 = 0.0;
    double t1 = 0.0;
    IVector x0_box;
    IVector x1_box;
    IVector apriori_box;  // holds chi(t; x) for every t in [t0, t1], x in x0_box
    IMatrix F_box;        // holds the gradient of chi_{t0}^{t1} over x0_box
    IMatrix F_interval;   // holds the gradient of chi_{t0}^{t} for every t in [t0, t1]
};

// Interval Taylor step with a Picard a-priori enclosure; the variational
// equations run on the same jets so both enclosures share one consistency
// domain.  Throws NoAprioriEnclosure when no contracting enclosure is found
// (halving h is the caller's move) and IntervalBlowup past the width cap.
FlowStep enclose_step(const OdeSystem& sys, double t0, double h, const IVector& x0_box,
                      const IntegratorOptions& opts = {});

// Gradient enclosure valid for every intermediate time of the step.
IMatrix enclose_gradient_over_interval(const FlowStep& step, const OdeSystem& sys);

// Multi-step flow of a box with Lohner QR reconditioning between steps, used
// where many steps must be chained without the metric machinery above.
IVector flow_box(const OdeSystem& sys, double t0, double T, int n_steps,
                 const IVector& x0_box, const IntegratorOptions& opts = {});

} // namespace clrt
