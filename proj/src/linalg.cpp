#include "clrt/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace clrt {

namespace {

void check_finite(const Mat& m, const char* what) {
    if (!m.allFinite()) {
        throw NonFiniteEntry(std::string(what) + ": non-finite entry");
    }
}

double mag(const Interval& iv) { return std::max(std::abs(iv.lo), std::abs(iv.hi)); }

// Interval Gaussian elimination solving C * X = B for all point matrices in
// the enclosures; sound because every arithmetic step is interval arithmetic.
IMatrix interval_gauss_solve(IMatrix c, IMatrix b) {
    const std::size_t n = c.rows();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = 0.0;
        for (std::size_t i = k; i < n; ++i) {
            const Interval& p = c.at(i, k);
            if (!contains(p, 0.0) && std::abs(mid(p)) > best) {
                best = std::abs(mid(p));
                piv = i;
            }
        }
        if (best == 0.0) {
            throw RankDeficient("interval elimination hit a zero-straddling pivot");
        }
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(c.at(piv, j), c.at(k, j));
                std::swap(b.at(piv, j), b.at(k, j));
            }
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            Interval f = c.at(i, k) / c.at(k, k);
            c.at(i, k) = Interval(0.0);
            for (std::size_t j = k + 1; j < n; ++j) {
                c.at(i, j) = c.at(i, j) - f * c.at(k, j);
            }
            for (std::size_t j = 0; j < n; ++j) {
                b.at(i, j) = b.at(i, j) - f * b.at(k, j);
            }
        }
    }
    IMatrix x(n, n);
    for (std::size_t jj = 0; jj < n; ++jj) {
        for (std::size_t ii = n; ii-- > 0;) {
            Interval s = b.at(ii, jj);
            for (std::size_t j = ii + 1; j < n; ++j) {
                s = s - c.at(ii, j) * x.at(j, jj);
            }
            x.at(ii, jj) = s / c.at(ii, ii);
        }
    }
    return x;
}

// Certified upper bound on the largest eigenvalue of a symmetric point
// matrix: Gershgorin after an approximate diagonalization (similarity is made
// rigorous with a verified inverse), with plain Gershgorin as fallback.
double sym_eigmax_point_upper(const Mat& m) {
    using detail::add_up;
    const auto n = m.rows();

    double plain = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
        double row = m(i, i);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j != i) row = add_up(row, std::abs(m(i, j)));
        }
        plain = std::max(plain, row);
    }

    double refined = plain;
    Eigen::SelfAdjointEigenSolver<Mat> es(m);
    if (es.info() == Eigen::Success) {
        try {
            const Mat q = es.eigenvectors();
            IMatrix b = matmul(matmul(verified_inverse(q), to_interval(m)),
                               to_interval(q));
            double worst = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < b.rows(); ++i) {
                double row = b.at(i, i).hi;
                for (std::size_t j = 0; j < b.cols(); ++j) {
                    if (j != i) row = add_up(row, mag(b.at(i, j)));
                }
                worst = std::max(worst, row);
            }
            refined = worst;
        } catch (const RankDeficient&) {
            // keep the plain bound
        }
    }
    return std::min(plain, refined);
}

// Certified upper bound on the spectral radius of an entrywise nonnegative
// symmetric matrix (Perron root = largest eigenvalue).
double nonneg_rho_upper(const Mat& r) {
    using detail::add_up;
    double inf_norm = 0.0;
    for (Eigen::Index i = 0; i < r.rows(); ++i) {
        double row = 0.0;
        for (Eigen::Index j = 0; j < r.cols(); ++j) row = add_up(row, r(i, j));
        inf_norm = std::max(inf_norm, row);
    }
    if (inf_norm == 0.0) return 0.0;
    return std::min(inf_norm, std::max(0.0, sym_eigmax_point_upper(r)));
}

} // namespace

// --- bridges ------------------------------------------------------------------

IMatrix to_interval(const Mat& m) {
    IMatrix r(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            r.at(i, j) = Interval(m(i, j));
        }
    }
    return r;
}

IVector to_interval(const Vec& v) {
    IVector r(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) r[i] = Interval(v(i));
    return r;
}

Mat mid_mat(const IMatrix& m) {
    Mat r(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) r(i, j) = mid(m.at(i, j));
    }
    return r;
}

Mat rad_mat(const IMatrix& m) {
    Mat r(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) r(i, j) = rad(m.at(i, j));
    }
    return r;
}

Vec mid_vec(const IVector& v) {
    Vec r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) r(i) = mid(v[i]);
    return r;
}

Vec rad_vec(const IVector& v) {
    Vec r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) r(i) = rad(v[i]);
    return r;
}

// --- certified inverse and determinant ------------------------------------------

IMatrix verified_inverse(const Mat& a) {
    check_finite(a, "verified_inverse");
    if (a.rows() != a.cols()) throw DimensionMismatch("inverse of non-square matrix");
    Eigen::PartialPivLU<Mat> lu(a);
    Mat approx = lu.inverse();
    if (!approx.allFinite()) throw RankDeficient("matrix numerically singular");
    // Precondition: C = approx * a is near identity, so elimination on C is
    // benign; C^{-1} * approx encloses a^{-1} exactly.
    IMatrix c = matmul(to_interval(approx), to_interval(a));
    return interval_gauss_solve(std::move(c), to_interval(approx));
}

Interval verified_det(const Mat& a) {
    check_finite(a, "verified_det");
    if (a.rows() != a.cols()) throw DimensionMismatch("det of non-square matrix");
    IMatrix c = to_interval(a);
    const std::size_t n = c.rows();
    Interval det(1.0);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = 0.0;
        for (std::size_t i = k; i < n; ++i) {
            if (!contains(c.at(i, k), 0.0) && std::abs(mid(c.at(i, k))) > best) {
                best = std::abs(mid(c.at(i, k)));
                piv = i;
            }
        }
        if (best == 0.0) {
            throw RankDeficient("determinant pivot straddles zero");
        }
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(c.at(piv, j), c.at(k, j));
            det = -det;
        }
        det *= c.at(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            Interval f = c.at(i, k) / c.at(k, k);
            for (std::size_t j = k + 1; j < n; ++j) {
                c.at(i, j) = c.at(i, j) - f * c.at(k, j);
            }
        }
    }
    return det;
}

// --- metric -----------------------------------------------------------------------

Metric Metric::euclidean(int n) {
    return from_factor(Mat::Identity(n, n));
}

Metric Metric::from_factor(const Mat& a) {
    check_finite(a, "Metric::from_factor");
    Metric m;
    m.A = a;
    m.A_inv = verified_inverse(a);
    Mat gram = a.transpose() * a;
    m.M = 0.5 * (gram + gram.transpose());
    double inv_norm = spectral_norm_bound(m.A_inv);
    // lambda_min(A^T A) = sigma_min(A)^2 >= 1 / ||A^{-1}||_2^2
    m.pd_lower = detail::div_down(1.0, detail::mul_up(inv_norm, inv_norm));
    return m;
}

Metric decompose(const Mat& m_sym) {
    check_finite(m_sym, "decompose");
    if (m_sym.rows() != m_sym.cols()) {
        throw DimensionMismatch("decompose needs a square matrix");
    }
    Mat s = 0.5 * (m_sym + m_sym.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(s);
    if (es.info() != Eigen::Success) {
        throw NotPositiveDefinite("eigendecomposition failed");
    }
    const Vec& ev = es.eigenvalues();
    if (ev.minCoeff() <= 0.0) {
        throw NotPositiveDefinite("matrix has a non-positive eigenvalue");
    }
    Mat root = es.eigenvectors() * ev.cwiseSqrt().asDiagonal() *
               es.eigenvectors().transpose();
    root = 0.5 * (root + root.transpose());
    try {
        Metric m = Metric::from_factor(root);
        if (m.pd_lower <= 0.0) {
            throw NotPositiveDefinite("positive definiteness not certifiable");
        }
        return m;
    } catch (const RankDeficient&) {
        throw NotPositiveDefinite("square root not certifiably invertible");
    }
}

Interval weighted_norm(const IVector& x, const Metric& m) {
    return norm2(matvec(to_interval(m.A), x));
}

// --- eigen bounds --------------------------------------------------------------------

double sym_eigmax_upper(const IMatrix& s) {
    if (s.rows() != s.cols()) throw DimensionMismatch("sym_eigmax of non-square");
    for (const Interval& iv : s.e) {
        if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi)) {
            throw NonFiniteEntry("sym_eigmax_upper: infinite entry");
        }
    }
    const std::size_t n = s.rows();
    IMatrix sym = hull(s, transpose(s));

    // Perturbation route: lambda_max(mid) + rho(rad) dominates every
    // symmetric member mid + E with |E| <= rad entrywise.
    Mat mid_m = mid_mat(sym);
    mid_m = 0.5 * (mid_m + mid_m.transpose());
    Mat rad_m = rad_mat(sym);
    rad_m = rad_m.cwiseMax(rad_m.transpose().eval());
    double bound = detail::add_up(sym_eigmax_point_upper(mid_m),
                                  nonneg_rho_upper(rad_m));

    // Vertex route (exact for symmetric interval matrices): the maximum is
    // attained at a sign-pattern vertex, 2^(n-1) candidates.
    if (n <= 4) {
        double vertex_best = -std::numeric_limits<double>::infinity();
        const int combos = 1 << (n - 1);
        Mat v(n, n);
        for (int mask = 0; mask < combos; ++mask) {
            for (std::size_t i = 0; i < n; ++i) {
                const int zi = (i == 0) ? 1 : (((mask >> (i - 1)) & 1) ? 1 : -1);
                for (std::size_t j = 0; j < n; ++j) {
                    if (i == j) {
                        v(i, j) = sym.at(i, j).hi;
                        continue;
                    }
                    const int zj = (j == 0) ? 1 : (((mask >> (j - 1)) & 1) ? 1 : -1);
                    v(i, j) = (zi * zj > 0) ? sym.at(i, j).hi : sym.at(i, j).lo;
                }
            }
            v = 0.5 * (v + v.transpose().eval());
            vertex_best = std::max(vertex_best, sym_eigmax_point_upper(v));
        }
        bound = std::min(bound, vertex_best);
    }
    return bound;
}

double spectral_norm_bound(const IMatrix& g) {
    IMatrix gtg = matmul(transpose(g), g);
    double lam = std::max(0.0, sym_eigmax_upper(gtg));
    return detail::sqrt_up(lam);
}

// --- real eigenbasis ------------------------------------------------------------------

RealEigenbasis real_eigenbasis(const Mat& f) {
    check_finite(f, "real_eigenbasis");
    if (f.rows() != f.cols()) throw DimensionMismatch("eigenbasis of non-square");
    const int n = static_cast<int>(f.rows());

    Eigen::EigenSolver<Mat> es(f);
    if (es.info() != Eigen::Success) {
        throw NearDefective("eigendecomposition did not converge");
    }
    const auto& vals = es.eigenvalues();
    const auto& vecs = es.eigenvectors();

    double scale = 0.0;
    for (int i = 0; i < n; ++i) scale = std::max(scale, std::abs(vals(i)));
    const double imag_tol = 1e-10 * (1.0 + scale);

    struct Entry {
        std::complex<double> lambda;
        int index;
        bool is_pair;
    };
    std::vector<Entry> entries;
    std::vector<bool> used(n, false);
    for (int i = 0; i < n; ++i) {
        if (used[i]) continue;
        used[i] = true;
        std::complex<double> l = vals(i);
        if (std::abs(l.imag()) <= imag_tol) {
            entries.push_back({std::complex<double>(l.real(), 0.0), i, false});
            continue;
        }
        // Find and consume the conjugate partner.
        int partner = -1;
        double best = std::numeric_limits<double>::infinity();
        for (int j = 0; j < n; ++j) {
            if (used[j]) continue;
            double d = std::abs(vals(j) - std::conj(l));
            if (d < best) {
                best = d;
                partner = j;
            }
        }
        if (partner < 0) throw NearDefective("unpaired complex eigenvalue");
        used[partner] = true;
        if (l.imag() < 0) l = std::conj(l); // keep the Im > 0 representative
        entries.push_back({l, (vals(i).imag() > 0) ? i : partner, true});
    }

    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.lambda.real() != b.lambda.real()) {
            return a.lambda.real() > b.lambda.real();
        }
        return a.lambda.imag() > b.lambda.imag();
    });

    Mat v_real = Mat::Zero(n, n);
    std::vector<double> moduli;
    std::set<int> pair_starts;
    int col = 0;
    for (const Entry& e : entries) {
        Eigen::VectorXcd v = vecs.col(e.index);
        v.normalize();
        // Rotate so the first significant entry is real positive.  A unit
        // vector always has an entry of magnitude >= 1/sqrt(n), so the
        // threshold never filters everything out.
        int lead = 0;
        for (int i = 0; i < n; ++i) {
            if (std::abs(v(i)) > 1e-8) {
                lead = i;
                break;
            }
        }
        v *= std::conj(v(lead)) / std::abs(v(lead));
        if (e.is_pair) {
            pair_starts.insert(col);
            v_real.col(col) = v.imag();
            v_real.col(col + 1) = v.real();
            const double m = std::abs(e.lambda);
            moduli.push_back(m);
            moduli.push_back(m);
            col += 2;
        } else {
            Vec rv = v.real();
            double norm = rv.norm();
            if (norm < 1e-8) throw NearDefective("real eigenvector lost to phase");
            v_real.col(col) = rv / norm;
            moduli.push_back(std::abs(e.lambda.real()));
            col += 1;
        }
    }

    Eigen::JacobiSVD<Mat> svd(v_real);
    const double smin = svd.singularValues()(n - 1);
    const double smax = svd.singularValues()(0);
    const double cond = (smin > 0.0) ? smax / smin
                                     : std::numeric_limits<double>::infinity();
    if (!(cond < 1e8)) {
        throw NearDefective("eigenvector basis condition " + std::to_string(cond));
    }

    Mat a_raw = v_real.inverse();
    // Per-block row scaling to unit Frobenius norm; a positive scalar times
    // the identity commutes with the block, so the block form is unchanged.
    for (std::size_t i = 0; i < moduli.size();) {
        const int len = pair_starts.count(static_cast<int>(i)) ? 2 : 1;
        double fro = a_raw.middleRows(i, len).norm();
        if (fro <= 0.0) throw NearDefective("degenerate block row");
        a_raw.middleRows(i, len) /= fro;
        i += len;
    }

    RealEigenbasis out;
    out.a_hat = std::move(a_raw);
    out.eig_moduli = std::move(moduli);
    out.pair_starts = std::move(pair_starts);
    out.basis_cond = cond;
    return out;
}

} // namespace clrt
