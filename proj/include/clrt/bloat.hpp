#pragma once

#include <iosfwd>

#include "clrt/clrt.hpp"

namespace clrt {

enum class Direction { Forward, Backward };

struct PruneStats {
    long boxes_explored = 0;
    int max_depth = 0;
};

// Outcome of one eps-satisfiability query about max ||h f||_{M0} over the
// ball and the step window.  Proved means the branch-and-prune exhausted the
// domain with every leaf below the bound; Counterexample carries a box whose
// enclosure lies certifiably above bound - eps; BudgetExhausted decides
// nothing and is treated like a satisfiable answer by callers.
struct VerifyOutcome {
    enum class Kind { Proved, Counterexample, BudgetExhausted };
    Kind kind = Kind::BudgetExhausted;
    IVector x_box;        // witness state box (Counterexample only)
    Interval s_box;       // witness offset within [0, h]
    PruneStats stats;
};

struct BloatResult {
    double delta_big = 0.0;    // certified continuous radius
    double tilde_delta = 0.0;  // certified bound on max ||h f||_{M0}
    PruneStats prune_stats;
    Direction direction = Direction::Forward;
};

// Non-certified estimate of max ||h f(t0 +/- s, x)||_{M0} over the ball and
// s in [0, h]: coarse sampling plus multi-start local ascent.  A low value
// only costs extra certification rounds, never soundness.
double estimate_max_speed(const OdeSystem& sys, double t0, double h, const Ball& ball,
                          Direction dir = Direction::Forward, unsigned seed = 2026);

// Interval branch-and-prune over (ball hull box) x [0, h], with boxes
// certifiably outside the ball discarded.  The backward direction evaluates
// f(t0 - s, x).  An optional sink receives one JSON line per explored box.
VerifyOutcome verify_bound(const OdeSystem& sys, double t0, double h, const Ball& ball,
                           double bound, double eps, Direction dir,
                           const ClrtConfig& cfg, std::ostream* dump = nullptr);

// Certified radius delta_big such that every trajectory starting in ball0
// stays inside the delta_big ball of the same center and metric throughout
// [t0, t0+h] (or [t0-h, t0] backward): grow a trial radius by c_delta until
// the certified speed bound fits, i.e. radius + tilde_delta <= trial.
// Throws BloatDiverged past cfg.bloat_cap_factor * radius.
BloatResult bloat_radius(const OdeSystem& sys, double t0, double h, const Ball& ball0,
                         const ClrtConfig& cfg, Direction dir = Direction::Forward,
                         std::ostream* dump = nullptr);

} // namespace clrt
