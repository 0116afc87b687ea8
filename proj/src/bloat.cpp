#include "clrt/bloat.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <utility>
#include <vector>

namespace clrt {

namespace {

Interval query_time(double t0, const Interval& s, Direction dir) {
    return dir == Direction::Forward ? Interval(t0) + s : Interval(t0) - s;
}

Interval speed_enclosure(const OdeSystem& sys, const Metric& m, double t0, double h,
                         Direction dir, const IVector& x, const Interval& s) {
    IVector f = eval_f(sys, query_time(t0, s, dir), x);
    return weighted_norm(Interval(h) * f, m);
}

double speed_point(const OdeSystem& sys, const Mat& a, double t0, double h, Direction dir,
                   const Vec& x, double s) {
    double t = dir == Direction::Forward ? t0 + s : t0 - s;
    return h * (a * eval_f(sys, t, x)).norm();
}

// Sampling state shared by the cheap gate and the full estimator.
struct Sampler {
    const OdeSystem& sys;
    const Ball& ball;
    double t0;
    double h;
    Direction dir;
    Mat ainv;     // point inverse; the estimate carries no rigor
    Vec c;
    std::mt19937_64 rng;
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unit{0.0, 1.0};
    double best = 0.0;
    Vec best_x;
    double best_s = 0.0;

    Sampler(const OdeSystem& s_, double t0_, double h_, const Ball& b, Direction d,
            unsigned seed)
        : sys(s_), ball(b), t0(t0_), h(h_), dir(d),
          ainv(b.metric.A.inverse()), c(mid_vec(b.center_box)), rng(seed), best_x(c) {}

    double eval(const Vec& x, double s) {
        double v = speed_point(sys, ball.metric.A, t0, h, dir, x, s);
        if (v > best) {
            best = v;
            best_x = x;
            best_s = s;
        }
        return v;
    }

    Vec random_dir() {
        Vec u(c.size());
        for (int i = 0; i < u.size(); ++i) u(i) = gauss(rng);
        double n = u.norm();
        return n > 0.0 ? Vec(u / n) : Vec(Vec::Unit(u.size(), 0));
    }

    Vec clip(Vec x) {
        Vec z = ball.metric.A * (x - c);
        double r = z.norm();
        if (r > ball.radius) x = c + ainv * (z * (ball.radius / r));
        return x;
    }

    // Boundary, interior and center samples at a spread of times.
    void coarse(int count) {
        eval(c, 0.0);
        eval(c, h);
        for (int i = 0; i < count; ++i) {
            double r = i % 2 == 0 ? ball.radius
                                  : ball.radius * std::pow(unit(rng), 1.0 / c.size());
            Vec x = c + ainv * (r * random_dir());
            eval(x, h * (i % 5) / 4.0);
        }
    }

    // Greedy random ascent from (x, s), clipped into the ball.
    void ascend(Vec x, double s) {
        const int n = static_cast<int>(c.size());
        double v = eval(x, s);
        double step = 0.5 * ball.radius;
        double sstep = 0.25 * h;
        for (int round = 0; round < 60 && step > 1e-6 * ball.radius; ++round) {
            bool improved = false;
            for (int trial = 0; trial < 2 * n + 2; ++trial) {
                Vec xn = clip(x + ainv * (step * random_dir()));
                double sn = std::clamp(s + sstep * gauss(rng), 0.0, h);
                double vn = eval(xn, sn);
                if (vn > v) {
                    x = xn;
                    s = sn;
                    v = vn;
                    improved = true;
                }
            }
            if (!improved) {
                step *= 0.5;
                sstep *= 0.5;
            }
        }
    }
};

// Sampling-only lower estimate; used to skip certification attempts that a
// handful of points already refute.
double coarse_max_speed(const OdeSystem& sys, double t0, double h, const Ball& ball,
                        Direction dir, unsigned seed) {
    Sampler s(sys, t0, h, ball, dir, seed);
    s.coarse(24 + 8 * ball.dim());
    return s.best;
}

void accumulate(PruneStats& total, const PruneStats& part) {
    total.boxes_explored += part.boxes_explored;
    total.max_depth = std::max(total.max_depth, part.max_depth);
}

void dump_box(std::ostream* dump, const IVector& x, const Interval& s, const Interval* g,
              const char* verdict) {
    if (!dump) return;
    nlohmann::json rec;
    auto& xs = rec["x"];
    for (const auto& xi : x.e) xs.push_back({xi.lo, xi.hi});
    rec["s"] = {s.lo, s.hi};
    if (g) rec["g"] = {g->lo, g->hi};
    rec["verdict"] = verdict;
    *dump << rec.dump() << '\n';
}

} // namespace

double estimate_max_speed(const OdeSystem& sys, double t0, double h, const Ball& ball,
                          Direction dir, unsigned seed) {
    Sampler s(sys, t0, h, ball, dir, seed);
    s.coarse(64 + 32 * ball.dim());
    Vec seed_x = s.best_x;
    double seed_s = s.best_s;
    s.ascend(seed_x, seed_s);
    for (int i = 0; i < 3 + ball.dim(); ++i) {
        s.ascend(s.clip(s.c + s.ainv * (ball.radius * s.random_dir())), s.unit(s.rng) * h);
    }
    return s.best;
}

VerifyOutcome verify_bound(const OdeSystem& sys, double t0, double h, const Ball& ball,
                           double bound, double eps, Direction dir, const ClrtConfig& cfg,
                           std::ostream* dump) {
    if (!(bound > 0.0) || !(eps > 0.0)) {
        throw BadParameter("verify_bound needs a positive bound and eps");
    }
    struct Item {
        IVector x;
        Interval s;
        int depth = 0;
    };
    std::vector<Item> stack;
    stack.push_back({ball_to_box(ball), Interval(0.0, h), 0});

    VerifyOutcome out;
    PruneStats stats;
    const std::size_t n = ball.center_box.size();

    while (!stack.empty()) {
        Item it = std::move(stack.back());
        stack.pop_back();
        ++stats.boxes_explored;
        stats.max_depth = std::max(stats.max_depth, it.depth);
        if (stats.boxes_explored > cfg.prune_box_budget) {
            out.kind = VerifyOutcome::Kind::BudgetExhausted;
            out.stats = stats;
            return out;
        }

        Interval dist = weighted_norm(it.x - ball.center_box, ball.metric);
        if (dist.lo > ball.radius) {
            dump_box(dump, it.x, it.s, nullptr, "outside");
            continue;
        }

        Interval g = speed_enclosure(sys, ball.metric, t0, h, dir, it.x, it.s);
        if (g.hi <= bound) {
            dump_box(dump, it.x, it.s, &g, "proved");
            continue;
        }
        if (g.lo > bound - eps) {
            dump_box(dump, it.x, it.s, &g, "counterexample");
            out.kind = VerifyOutcome::Kind::Counterexample;
            out.x_box = std::move(it.x);
            out.s_box = it.s;
            out.stats = stats;
            return out;
        }

        // Undecided: split the widest dimension (time weighted, and never
        // split time when the field ignores it).
        int split = -1;
        double wmax = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double w = width(it.x[i]);
            if (w > wmax) {
                wmax = w;
                split = static_cast<int>(i);
            }
        }
        if (sys.time_variant && width(it.s) * cfg.time_split_weight > wmax) {
            split = static_cast<int>(n);
        }
        if (split < 0 || it.depth >= cfg.prune_max_depth) {
            dump_box(dump, it.x, it.s, &g, "undecided");
            out.kind = VerifyOutcome::Kind::BudgetExhausted;
            out.stats = stats;
            return out;
        }
        dump_box(dump, it.x, it.s, &g, "split");

        Item lo_half{it.x, it.s, it.depth + 1};
        Item hi_half{std::move(it.x), it.s, lo_half.depth};
        if (split == static_cast<int>(n)) {
            double m = mid(lo_half.s);
            lo_half.s = Interval(lo_half.s.lo, m);
            hi_half.s = Interval(m, hi_half.s.hi);
        } else {
            double m = mid(lo_half.x[split]);
            lo_half.x[split] = Interval(lo_half.x[split].lo, m);
            hi_half.x[split] = Interval(m, hi_half.x[split].hi);
        }
        stack.push_back(std::move(lo_half));
        stack.push_back(std::move(hi_half));
    }

    out.kind = VerifyOutcome::Kind::Proved;
    out.stats = stats;
    return out;
}

BloatResult bloat_radius(const OdeSystem& sys, double t0, double h, const Ball& ball0,
                         const ClrtConfig& cfg, Direction dir, std::ostream* dump) {
    if (!(cfg.c_delta > 1.0)) throw ConfigError("c_delta must exceed 1");
    if (!(h > 0.0)) throw BadParameter("bloat_radius needs a positive step");

    const double delta0 = ball0.radius;
    const double cap = cfg.bloat_cap_factor * delta0;
    const double tilde_floor = 1e-15 * (1.0 + delta0);
    PruneStats total;

    double trial = delta0 * cfg.c_delta;
    while (trial <= cap) {
        Ball tb{ball0.center_box, ball0.metric, trial};

        // A certification attempt is pointless while sampled speeds alone
        // already overflow the trial radius.
        double coarse = coarse_max_speed(sys, t0, h, tb, dir, cfg.estimator_seed);
        if (detail::add_up(delta0, coarse) > trial) {
            trial *= cfg.c_delta;
            continue;
        }

        // First certification attempt sits a few percent above the sampled
        // maximum; anything lower is near-certain to fail.  The violation
        // tolerance tracks the open bracket so failed attempts are rejected
        // at coarse subdivision depth instead of machine precision.
        double lo = std::max(estimate_max_speed(sys, t0, h, tb, dir, cfg.estimator_seed),
                             tilde_floor);
        double tilde = lo * 1.04;
        bool proved = false;
        while (tilde <= cap) {
            double eps = std::max(cfg.eps_sat_rel * tilde, 0.25 * (tilde - lo));
            auto res = verify_bound(sys, t0, h, tb, tilde, eps, dir, cfg, dump);
            accumulate(total, res.stats);
            if (res.kind == VerifyOutcome::Kind::Proved) {
                proved = true;
                break;
            }
            lo = tilde;
            tilde *= cfg.c_delta;
        }
        if (!proved) break;

        // Bisection polish between the largest refuted-or-unknown value and
        // the certified one.
        for (int i = 0; i < cfg.refine_bisections; ++i) {
            double m = 0.5 * (lo + tilde);
            if (!(m > lo) || !(m < tilde)) break;
            double eps = std::max(cfg.eps_sat_rel * m, 0.25 * (tilde - lo));
            auto res = verify_bound(sys, t0, h, tb, m, eps, dir, cfg, dump);
            accumulate(total, res.stats);
            if (res.kind == VerifyOutcome::Kind::Proved) {
                tilde = m;
            } else {
                lo = m;
            }
        }

        double hat = detail::add_up(delta0, tilde);
        if (hat <= trial) {
            BloatResult r;
            r.delta_big = cfg.keep_outer_trial ? trial : hat;
            r.tilde_delta = tilde;
            r.prune_stats = total;
            r.direction = dir;
            return r;
        }
        trial *= cfg.c_delta;
    }
    throw BloatDiverged("no radius below " + std::to_string(cap) +
                        " absorbs the certified speed over one step of " + std::to_string(h));
}

} // namespace clrt
