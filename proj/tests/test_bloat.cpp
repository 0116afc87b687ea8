#include <doctest.h>

#include <json.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <sstream>

#include "clrt/bloat.hpp"
#include "clrt/errors.hpp"
#include "support/hp.hpp"

using clrt::Ball;
using clrt::BloatResult;
using clrt::ClrtConfig;
using clrt::Direction;
using clrt::Interval;
using clrt::IVector;
using clrt::Metric;
using clrt::OdeSystem;
using clrt::TapeBuilder;
using clrt::Vec;
using clrt::VerifyOutcome;

namespace {

OdeSystem constant_system(double c0, double c1) {
    OdeSystem sys;
    sys.name = "const2";
    sys.dim = 2;
    {
        TapeBuilder tb(2);
        tb.output(tb.num(c0));
        tb.output(tb.num(c1));
        sys.f = tb.take();
    }
    {
        TapeBuilder tb(2);
        for (int i = 0; i < 4; ++i) tb.output(tb.num(0.0));
        sys.jac = tb.take();
    }
    return sys;
}

Ball euclid_ball(const Vec& center, double radius) {
    return Ball{clrt::to_interval(center), Metric::euclidean(static_cast<int>(center.size())),
                radius};
}

ClrtConfig plain_cfg(int n) {
    ClrtConfig cfg;
    cfg.M0 = Metric::euclidean(n);
    cfg.x0_box = IVector(n);
    cfg.delta0 = 0.01;
    return cfg;
}

Vec sample_ball_point(std::mt19937_64& rng, const Ball& b) {
    int n = b.dim();
    std::normal_distribution<double> gauss;
    Vec u(n);
    for (int i = 0; i < n; ++i) u(i) = gauss(rng);
    u.normalize();
    double r = b.radius * std::pow(oracle::uniform(rng, 0.0, 1.0), 1.0 / n);
    return clrt::mid_vec(b.center_box) + b.metric.A.inverse() * (r * u);
}

double speed_at(const OdeSystem& sys, const Ball& b, double t0, double h, double s,
                const Vec& x, Direction dir) {
    double t = dir == Direction::Forward ? t0 + s : t0 - s;
    return h * (b.metric.A * eval_f(sys, t, x)).norm();
}

} // namespace

TEST_CASE("a zero field certifies immediately") {
    OdeSystem sys = constant_system(0.0, 0.0);
    Vec c(2);
    c << 0.4, -0.2;
    Ball ball = euclid_ball(c, 0.01);
    ClrtConfig cfg = plain_cfg(2);

    CHECK(clrt::estimate_max_speed(sys, 0.0, 0.1, ball) == 0.0);

    auto out = clrt::verify_bound(sys, 0.0, 0.1, ball, 1e-6, 1e-15, Direction::Forward, cfg);
    CHECK(out.kind == VerifyOutcome::Kind::Proved);
    CHECK(out.stats.boxes_explored >= 1);

    BloatResult r = clrt::bloat_radius(sys, 0.0, 0.1, ball, cfg);
    CHECK(r.delta_big > 0.01);
    CHECK(r.delta_big <= 0.01 * 1.1 * (1 + 1e-12));
    CHECK(r.delta_big >= 0.01 + r.tilde_delta);
    CHECK(r.tilde_delta > 0.0);
    CHECK(r.tilde_delta < 1e-9);

    cfg.keep_outer_trial = true;
    BloatResult rt = clrt::bloat_radius(sys, 0.0, 0.1, ball, cfg);
    CHECK(rt.delta_big == 0.01 * 1.1);
}

TEST_CASE("a constant field's speed is certified exactly") {
    OdeSystem sys = constant_system(1.0, 0.0);
    Ball ball = euclid_ball(Vec::Zero(2), 0.01);
    ClrtConfig cfg = plain_cfg(2);

    double est = clrt::estimate_max_speed(sys, 0.0, 0.1, ball);
    CHECK(est == doctest::Approx(0.1).epsilon(1e-12));

    auto low = clrt::verify_bound(sys, 0.0, 0.1, ball, 0.05, 0.05 * 1e-9, Direction::Forward, cfg);
    REQUIRE(low.kind == VerifyOutcome::Kind::Counterexample);
    // The witness box really does violate the bound, straight from its own
    // interval evaluation.
    Interval t = Interval(0.0) + low.s_box;
    IVector f = eval_f(sys, t, low.x_box);
    Interval g = clrt::weighted_norm(Interval(0.1) * f, ball.metric);
    CHECK(g.lo > 0.05 - 0.05 * 1e-9);

    auto high = clrt::verify_bound(sys, 0.0, 0.1, ball, 0.2, 0.2 * 1e-9, Direction::Forward, cfg);
    CHECK(high.kind == VerifyOutcome::Kind::Proved);
}

TEST_CASE("constant-speed bloating lands in the predicted window") {
    OdeSystem sys = constant_system(0.7, 0.0);
    Ball ball = euclid_ball(Vec::Zero(2), 0.01);
    ClrtConfig cfg = plain_cfg(2);

    BloatResult r = clrt::bloat_radius(sys, 0.0, 0.1, ball, cfg);
    double travel = 0.1 * 0.7;
    CHECK(r.tilde_delta >= travel);
    CHECK(r.tilde_delta <= travel * 1.05);
    CHECK(r.delta_big >= 0.01 + travel);
    CHECK(r.delta_big <= (0.01 + travel) * 1.1 * 1.1);
    CHECK(r.delta_big >= 0.01 + r.tilde_delta);
    CHECK(r.prune_stats.boxes_explored >= 1);
}

TEST_CASE("estimates track a dense grid") {
    OdeSystem sys = clrt::builtin("dubins");
    Vec c(3);
    c << 0.0, 0.0, 0.7854;
    Ball ball = euclid_ball(c, 0.01);
    double h = 0.01;

    double grid_max = 0.0;
    IVector box = clrt::ball_to_box(ball);
    const int nx = 22, ns = 10;
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < nx; ++j) {
            for (int l = 0; l < nx; ++l) {
                Vec x(3);
                x << box[0].lo + clrt::width(box[0]) * i / (nx - 1),
                    box[1].lo + clrt::width(box[1]) * j / (nx - 1),
                    box[2].lo + clrt::width(box[2]) * l / (nx - 1);
                if ((x - c).norm() > ball.radius) continue;
                for (int m = 0; m < ns; ++m) {
                    double s = h * m / (ns - 1);
                    grid_max = std::max(grid_max, speed_at(sys, ball, 0.0, h, s, x,
                                                           Direction::Forward));
                }
            }
        }
    }
    double est = clrt::estimate_max_speed(sys, 0.0, h, ball);
    CHECK(est >= grid_max * 0.98);
    CHECK(est <= grid_max * 1.02);
}

TEST_CASE("proved bounds survive sampling and stay proved when raised") {
    OdeSystem sys = clrt::builtin("dubins");
    Vec c(3);
    c << 0.0, 0.0, 0.7854;
    Ball ball = euclid_ball(c, 0.01);
    ClrtConfig cfg = plain_cfg(3);
    cfg.delta0 = 0.01;
    double h = 0.01;

    BloatResult r = clrt::bloat_radius(sys, 0.0, h, ball, cfg);
    CHECK(r.delta_big >= 0.01 + r.tilde_delta);

    // Re-verification at the returned values.
    Ball big{ball.center_box, ball.metric, r.delta_big};
    auto again = clrt::verify_bound(sys, 0.0, h, big, r.tilde_delta, r.tilde_delta * 1e-9,
                                    Direction::Forward, cfg);
    CHECK(again.kind == VerifyOutcome::Kind::Proved);

    // Proving a bound proves every larger one.
    for (double factor : {1.3, 2.0, 10.0}) {
        auto up = clrt::verify_bound(sys, 0.0, h, big, r.tilde_delta * factor,
                                     r.tilde_delta * factor * 1e-9, Direction::Forward, cfg);
        CHECK(up.kind == VerifyOutcome::Kind::Proved);
    }

    // And no sample in the proved domain beats the certificate.
    std::mt19937_64 rng(5);
    for (int i = 0; i < 10000; ++i) {
        Vec x = sample_ball_point(rng, big);
        double s = oracle::uniform(rng, 0.0, h);
        CHECK(speed_at(sys, big, 0.0, h, s, x, Direction::Forward) <= r.tilde_delta);
    }

    // Well below the true maximum the query must refuse to certify.
    auto low = clrt::verify_bound(sys, 0.0, h, big, r.tilde_delta * 0.5,
                                  r.tilde_delta * 0.5 * 1e-9, Direction::Forward, cfg);
    CHECK(low.kind != VerifyOutcome::Kind::Proved);
}

TEST_CASE("forward and backward bounds agree for frozen time") {
    OdeSystem sys = clrt::builtin("brusselator");
    Vec c(2);
    c << 1.0, 1.0;
    Ball ball = euclid_ball(c, 0.014142135623730951);
    ClrtConfig cfg = plain_cfg(2);
    cfg.delta0 = ball.radius;

    BloatResult fw = clrt::bloat_radius(sys, 0.37, 0.01, ball, cfg, Direction::Forward);
    BloatResult bw = clrt::bloat_radius(sys, 0.37, 0.01, ball, cfg, Direction::Backward);
    CHECK(fw.direction == Direction::Forward);
    CHECK(bw.direction == Direction::Backward);
    CHECK(std::abs(fw.tilde_delta - bw.tilde_delta) <= 1e-9);
    CHECK(std::abs(fw.delta_big - bw.delta_big) <= 1e-9);
}

TEST_CASE("a runaway field diverges the bloating loop") {
    OdeSystem sys = constant_system(1e6, 0.0);
    Ball ball = euclid_ball(Vec::Zero(2), 0.01);
    ClrtConfig cfg = plain_cfg(2);
    CHECK_THROWS_AS(clrt::bloat_radius(sys, 0.0, 0.1, ball, cfg), clrt::BloatDiverged);
}

TEST_CASE("exhausted budgets are reported, not misproved") {
    OdeSystem sys = clrt::builtin("brusselator");
    Vec c(2);
    c << 1.0, 1.0;
    Ball ball = euclid_ball(c, 0.02);
    ClrtConfig cfg = plain_cfg(2);
    cfg.prune_max_depth = 2;

    double est = clrt::estimate_max_speed(sys, 0.0, 0.01, ball);
    auto out = clrt::verify_bound(sys, 0.0, 0.01, ball, est * 1.001, est * 1e-15,
                                  Direction::Forward, cfg);
    CHECK(out.kind == VerifyOutcome::Kind::BudgetExhausted);
}

TEST_CASE("the prune trace is line-delimited JSON") {
    OdeSystem sys = constant_system(1.0, 0.0);
    Ball ball = euclid_ball(Vec::Zero(2), 0.01);
    ClrtConfig cfg = plain_cfg(2);

    std::ostringstream dump;
    auto out = clrt::verify_bound(sys, 0.0, 0.1, ball, 0.2, 0.2 * 1e-9, Direction::Forward,
                                  cfg, &dump);
    CHECK(out.kind == VerifyOutcome::Kind::Proved);

    std::istringstream lines(dump.str());
    std::string line;
    long parsed = 0;
    while (std::getline(lines, line)) {
        auto rec = nlohmann::json::parse(line);
        CHECK(rec.contains("x"));
        CHECK(rec.contains("s"));
        CHECK(rec.contains("verdict"));
        ++parsed;
    }
    CHECK(parsed == out.stats.boxes_explored);
}
