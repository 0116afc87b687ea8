#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "clrt/errors.hpp"
#include "clrt/linalg.hpp"
#include "support/hp.hpp"

using clrt::IMatrix;
using clrt::Interval;
using clrt::IVector;
using clrt::Mat;
using clrt::Metric;
using clrt::Vec;
using oracle::encloses;
using oracle::hp;

namespace {

// Closed-form largest eigenvalue of a symmetric 2x2 in high precision.
hp sym2_eigmax(const hp& a, const hp& b, const hp& c) {
    return ((a + c) + sqrt((a - c) * (a - c) + 4 * b * b)) / 2;
}

Mat random_matrix(std::mt19937_64& rng, int n, double scale = 2.0) {
    std::uniform_real_distribution<double> d(-scale, scale);
    Mat m(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) m(i, j) = d(rng);
    }
    return m;
}

IMatrix widen(const Mat& m, std::mt19937_64& rng, double max_rad) {
    std::uniform_real_distribution<double> d(0.0, max_rad);
    IMatrix r(m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < m.cols(); ++j) {
            double rr = d(rng);
            r.at(i, j) = Interval(m(i, j) - rr, m(i, j) + rr);
        }
    }
    return r;
}

} // namespace

TEST_CASE("verified_inverse encloses the adjugate-formula inverse") {
    std::mt19937_64 rng(1001);
    int done = 0;
    while (done < 200) {
        Mat a = random_matrix(rng, 2);
        hp det = hp(a(0, 0)) * hp(a(1, 1)) - hp(a(0, 1)) * hp(a(1, 0));
        if (abs(det) < hp(0.05)) continue;
        ++done;
        IMatrix inv = clrt::verified_inverse(a);
        CHECK(encloses(inv.at(0, 0), hp(a(1, 1)) / det));
        CHECK(encloses(inv.at(0, 1), -hp(a(0, 1)) / det));
        CHECK(encloses(inv.at(1, 0), -hp(a(1, 0)) / det));
        CHECK(encloses(inv.at(1, 1), hp(a(0, 0)) / det));
        CHECK(clrt::max_width(inv) < 1e-10);
    }

    IMatrix id_inv = clrt::verified_inverse(Mat::Identity(4, 4));
    for (int i = 0; i < 4; ++i) {
        CHECK(clrt::contains(id_inv.at(i, i), 1.0));
    }

    Mat sing(2, 2);
    sing << 1, 2, 2, 4;
    CHECK_THROWS_AS(clrt::verified_inverse(sing), clrt::RankDeficient);
}

TEST_CASE("verified_det brackets the exact determinant") {
    std::mt19937_64 rng(1002);
    for (int it = 0; it < 200; ++it) {
        Mat a = random_matrix(rng, 3);
        hp det = 0;
        int sgn[6][4] = {{0, 1, 2, 1},  {1, 2, 0, 1},  {2, 0, 1, 1},
                         {2, 1, 0, -1}, {1, 0, 2, -1}, {0, 2, 1, -1}};
        for (auto& p : sgn) {
            det += hp(p[3]) * hp(a(0, p[0])) * hp(a(1, p[1])) * hp(a(2, p[2]));
        }
        Interval d = clrt::verified_det(a);
        CHECK(encloses(d, det));
        CHECK(clrt::width(d) < 1e-12);
    }
    CHECK(clrt::verified_det(Mat::Identity(5, 5)).lo == 1.0);
    CHECK(clrt::verified_det(Mat::Identity(5, 5)).hi == 1.0);
}

TEST_CASE("weighted_norm matches its factor definition") {
    Metric eu = Metric::euclidean(2);
    IVector x(2);
    x[0] = Interval(3.0);
    x[1] = Interval(4.0);
    Interval n = clrt::weighted_norm(x, eu);
    CHECK(encloses(n, 5.0));
    CHECK(clrt::width(n) < 1e-14);

    Mat m(2, 2);
    m << 4, 0, 0, 1;
    Metric diag = clrt::decompose(m);
    IVector e0(2);
    e0[0] = Interval(1.0);
    e0[1] = Interval(0.0);
    CHECK(encloses(clrt::weighted_norm(e0, diag), 2.0));

    std::mt19937_64 rng(555);
    for (int it = 0; it < 100; ++it) {
        int dim = 2 + static_cast<int>(it % 3);
        Mat a = random_matrix(rng, dim) + 4.0 * Mat::Identity(dim, dim);
        Metric mm = Metric::from_factor(a);
        Vec xp = random_matrix(rng, dim).col(0);
        IVector xi(dim);
        for (int i = 0; i < dim; ++i) xi[i] = Interval(xp(i));

        hp s = 0;
        for (int i = 0; i < dim; ++i) {
            hp row = 0;
            for (int j = 0; j < dim; ++j) row += hp(mm.A(i, j)) * hp(xp(j));
            s += row * row;
        }
        Interval wn = clrt::weighted_norm(xi, mm);
        CHECK(encloses(wn, sqrt(s)));
        // The rounded Gram matrix must agree with the factor route closely.
        double viaM = std::sqrt(xp.dot(mm.M * xp));
        CHECK(std::abs(clrt::mid(wn) - viaM) <= 1e-9 * (1.0 + viaM));
    }
}

TEST_CASE("sym_eigmax_upper is tight on points and sound on sets") {
    IMatrix d3(3, 3);
    d3.at(0, 0) = Interval(1.0);
    d3.at(1, 1) = Interval(2.0);
    d3.at(2, 2) = Interval(3.0);
    double b = clrt::sym_eigmax_upper(d3);
    CHECK(b >= 3.0);
    CHECK(b <= 3.0 + 1e-9);

    IMatrix s2(2, 2);
    s2.at(0, 0) = Interval(0.9, 1.1);
    s2.at(0, 1) = Interval(-0.1, 0.1);
    s2.at(1, 0) = Interval(-0.1, 0.1);
    s2.at(1, 1) = Interval(1.9, 2.1);
    double b2 = clrt::sym_eigmax_upper(s2);
    // True maximum over symmetric members sits at a vertex: 2.10990...
    double truth = (3.2 + std::sqrt(1.0 + 0.04)) / 2.0;
    CHECK(b2 >= truth - 1e-12);
    CHECK(b2 <= 2.2 + 1e-9); // never worse than midpoint + radius
}

TEST_CASE("sym_eigmax_upper dominates every symmetric vertex (2x2 oracle)") {
    std::mt19937_64 rng(2024);
    for (int it = 0; it < 500; ++it) {
        Mat m = random_matrix(rng, 2);
        Mat sym = 0.5 * (m + m.transpose());
        IMatrix s = widen(sym, rng, 0.5);
        // Force symmetry of the interval hull.
        s.at(1, 0) = s.at(0, 1);
        double bound = clrt::sym_eigmax_upper(s);
        for (double a : {s.at(0, 0).lo, s.at(0, 0).hi}) {
            for (double bb : {s.at(0, 1).lo, s.at(0, 1).hi}) {
                for (double c : {s.at(1, 1).lo, s.at(1, 1).hi}) {
                    CHECK(hp(bound) >= sym2_eigmax(hp(a), hp(bb), hp(c)));
                }
            }
        }
    }
}

TEST_CASE("sym_eigmax_upper dominates random symmetric members") {
    std::mt19937_64 rng(31007);
    for (int it = 0; it < 60; ++it) {
        int n = 2 + static_cast<int>(it % 4);
        Mat m = random_matrix(rng, n);
        Mat sym = 0.5 * (m + m.transpose());
        IMatrix s = widen(sym, rng, 0.3);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < i; ++j) s.at(i, j) = s.at(j, i);
        }
        double bound = clrt::sym_eigmax_upper(s);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int trial = 0; trial < 50; ++trial) {
            Mat member(n, n);
            for (int i = 0; i < n; ++i) {
                for (int j = i; j < n; ++j) {
                    const Interval& iv = s.at(i, j);
                    member(i, j) = member(j, i) = iv.lo + u(rng) * (iv.hi - iv.lo);
                }
            }
            Eigen::SelfAdjointEigenSolver<Mat> es(member);
            CHECK(es.eigenvalues().maxCoeff() <= bound + 1e-10);
        }
    }
}

TEST_CASE("decompose produces a certified positive square root") {
    Metric id = clrt::decompose(Mat::Identity(3, 3));
    CHECK((id.A - Mat::Identity(3, 3)).norm() < 1e-12);
    CHECK(id.pd_lower > 0.9);
    CHECK(id.pd_lower <= 1.0 + 1e-12);

    Mat d(2, 2);
    d << 4, 0, 0, 9;
    Metric md = clrt::decompose(d);
    CHECK(std::abs(md.A(0, 0) - 2.0) < 1e-12);
    CHECK(std::abs(md.A(1, 1) - 3.0) < 1e-12);
    CHECK(std::abs(md.A(0, 1)) < 1e-12);

    std::mt19937_64 rng(909);
    for (int it = 0; it < 100; ++it) {
        int n = 2 + static_cast<int>(it % 3);
        Mat r = random_matrix(rng, n);
        Mat spd = r.transpose() * r + 0.5 * Mat::Identity(n, n);
        Metric m = clrt::decompose(spd);
        CHECK((m.A.transpose() * m.A - spd).norm() < 1e-9 * spd.norm());
        CHECK((m.A - m.A.transpose()).norm() < 1e-9); // symmetric square root
        CHECK(m.pd_lower > 0.0);
        Eigen::SelfAdjointEigenSolver<Mat> es(spd);
        CHECK(m.pd_lower <= es.eigenvalues().minCoeff() + 1e-9);
    }

    Mat neg(2, 2);
    neg << 1, 0, 0, -1;
    CHECK_THROWS_AS(clrt::decompose(neg), clrt::NotPositiveDefinite);
    Mat sing(2, 2);
    sing << 1, 1, 1, 1;
    CHECK_THROWS_AS(clrt::decompose(sing), clrt::NotPositiveDefinite);
}

TEST_CASE("spectral_norm_bound brackets the largest singular value") {
    IMatrix f(2, 2);
    f.at(0, 0) = Interval(1.0);
    f.at(0, 1) = Interval(1.0);
    f.at(1, 0) = Interval(-4.0);
    f.at(1, 1) = Interval(1.0);
    double b = clrt::spectral_norm_bound(f);
    hp sigma1 = sqrt((hp(19) + sqrt(hp(261))) / 2); // 4.19258...
    CHECK(hp(b) >= sigma1);
    CHECK(hp(b) <= sigma1 + hp(1e-8));
    CHECK(std::abs(b - 4.1926) < 1e-3);

    double bi = clrt::spectral_norm_bound(IMatrix::identity(3));
    CHECK(bi >= 1.0);
    CHECK(bi <= 1.0 + 1e-9);

    std::mt19937_64 rng(7788);
    for (int it = 0; it < 100; ++it) {
        int n = 2 + static_cast<int>(it % 3);
        Mat g = random_matrix(rng, n);
        IMatrix gi = widen(g, rng, 0.05);
        double bound = clrt::spectral_norm_bound(gi);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int trial = 0; trial < 20; ++trial) {
            Mat member(n, n);
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    const Interval& iv = gi.at(i, j);
                    member(i, j) = iv.lo + u(rng) * (iv.hi - iv.lo);
                }
            }
            Eigen::JacobiSVD<Mat> svd(member);
            CHECK(svd.singularValues()(0) <= bound + 1e-10);
        }
    }
}

TEST_CASE("real_eigenbasis reproduces the complex-pair reference") {
    Mat f(2, 2);
    f << 1, 1, -4, 1; // eigenvalues 1 +/- 2i
    clrt::RealEigenbasis eb = clrt::real_eigenbasis(f);

    double s5 = std::sqrt(5.0);
    Mat expect(2, 2);
    expect << 0.0, 1.0 / s5, 2.0 / s5, 0.0;
    CHECK((eb.a_hat - expect).lpNorm<Eigen::Infinity>() < 1e-12);

    Mat block = eb.a_hat * f * eb.a_hat.inverse();
    Mat expect_block(2, 2);
    expect_block << 1, -2, 2, 1;
    CHECK((block - expect_block).lpNorm<Eigen::Infinity>() < 1e-10);

    REQUIRE(eb.eig_moduli.size() == 2);
    CHECK(std::abs(eb.eig_moduli[0] - s5) < 1e-12);
    CHECK(std::abs(eb.eig_moduli[1] - s5) < 1e-12);
}

TEST_CASE("real_eigenbasis handles real spectra deterministically") {
    Mat f(2, 2);
    f << 2, 0, 0, 3;
    clrt::RealEigenbasis eb = clrt::real_eigenbasis(f);
    // Ordering is by (Re, Im) descending, so the basis is the swap permutation.
    std::vector<double> mods = eb.eig_moduli;
    std::sort(mods.begin(), mods.end());
    CHECK(std::abs(mods[0] - 2.0) < 1e-12);
    CHECK(std::abs(mods[1] - 3.0) < 1e-12);
    CHECK(std::abs(eb.eig_moduli[0] - 3.0) < 1e-12);
    Mat block = eb.a_hat * f * eb.a_hat.inverse();
    CHECK(std::abs(block(0, 0) - 3.0) < 1e-12);
    CHECK(std::abs(block(1, 1) - 2.0) < 1e-12);
    CHECK(std::abs(block(0, 1)) < 1e-12);
    CHECK(std::abs(block(1, 0)) < 1e-12);

    Mat d(2, 2);
    d << 2, 0, 0, 0.5;
    clrt::RealEigenbasis ed = clrt::real_eigenbasis(d);
    CHECK((ed.a_hat - Mat::Identity(2, 2)).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("real_eigenbasis block-diagonalizes constructed spectra") {
    std::mt19937_64 rng(60601);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int it = 0; it < 100; ++it) {
        // Build F = V B V^-1 with a known block spectrum: one complex pair
        // (a, b) and one real eigenvalue. Moduli are known by construction.
        double a = u(rng);
        double bb = 0.3 + std::abs(u(rng));
        double lr = u(rng) + 3.0; // keep it separated from the pair
        Mat blocks = Mat::Zero(3, 3);
        blocks << a, -bb, 0, bb, a, 0, 0, 0, lr;
        Mat v;
        do {
            v = random_matrix(rng, 3);
        } while (std::abs(v.determinant()) < 0.3);
        Mat f = v * blocks * v.inverse();

        clrt::RealEigenbasis eb = clrt::real_eigenbasis(f);
        std::vector<double> mods = eb.eig_moduli;
        std::sort(mods.begin(), mods.end());
        double pair_mod = std::hypot(a, bb);
        std::vector<double> expect = {pair_mod, pair_mod, lr};
        std::sort(expect.begin(), expect.end());
        for (int i = 0; i < 3; ++i) CHECK(std::abs(mods[i] - expect[i]) < 1e-7);

        Mat block = eb.a_hat * f * eb.a_hat.inverse();
        // Off-block entries vanish; the pair block has the rotation shape.
        double scale = block.cwiseAbs().maxCoeff();
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                bool same_block =
                    (i == j) ||
                    (eb.pair_starts.count(std::min(i, j)) && std::abs(i - j) == 1);
                if (!same_block) CHECK(std::abs(block(i, j)) < 1e-7 * scale);
            }
        }
    }
}

TEST_CASE("real_eigenbasis rejects defective matrices") {
    Mat jordan(2, 2);
    jordan << 1, 1, 0, 1;
    CHECK_THROWS_AS(clrt::real_eigenbasis(jordan), clrt::NearDefective);
}
