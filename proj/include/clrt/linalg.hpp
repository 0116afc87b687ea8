#pragma once

#include <Eigen/Dense>
#include <set>
#include <vector>

#include "clrt/ivec.hpp"

namespace clrt {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// --- bridges between point and interval containers ---------------------------

IMatrix to_interval(const Mat& m);
IVector to_interval(const Vec& v);
Mat mid_mat(const IMatrix& m);
Mat rad_mat(const IMatrix& m);
Vec mid_vec(const IVector& v);
Vec rad_vec(const IVector& v);

// --- certified point-matrix helpers -------------------------------------------

// Enclosure of the exact inverse of a point matrix, via residual
// preconditioning and interval Gaussian elimination.
IMatrix verified_inverse(const Mat& a);

// Enclosure of the exact determinant of a point matrix.
Interval verified_det(const Mat& a);

// --- metric --------------------------------------------------------------------

// Positive definite quadratic form ||x||_M = ||A x||_2 with M = A^T A.  The
// factor A is the authoritative object: every certified computation routes
// through A and the enclosure of its inverse, so the form is exact for the
// stored doubles.  M is the rounded Gram matrix kept for reporting.
struct Metric {
    Mat A;
    Mat M;
    IMatrix A_inv;   // certified enclosure of A^{-1}
    double pd_lower; // certified lower bound on the smallest eigenvalue of M

    int dim() const { return static_cast<int>(A.rows()); }

    static Metric euclidean(int n);
    // Build from an invertible factor; throws RankDeficient.
    static Metric from_factor(const Mat& a);
};

// Symmetric square root of a positive definite matrix, PD-certified through
// interval arithmetic.  Throws NotPositiveDefinite.
Metric decompose(const Mat& m_sym);

// Enclosure of ||x||_M over the box x.
Interval weighted_norm(const IVector& x, const Metric& m);

// --- certified eigen bounds ------------------------------------------------------

// Upper bound on the largest eigenvalue over all symmetric matrices inside
// the interval hull of S (S is symmetrized first).  Combines the
// midpoint-plus-spectral-radius perturbation bound with exact vertex
// enumeration in low dimension, and returns the smaller of the two.
double sym_eigmax_upper(const IMatrix& s);

// Upper bound on the spectral norm over all matrices in G.
double spectral_norm_bound(const IMatrix& g);

// --- real eigenbasis --------------------------------------------------------------

// Real block-diagonalizing basis of a point matrix F.  a_hat satisfies
// a_hat * F * a_hat^{-1} = blockdiag(...), with 1x1 blocks holding real
// eigenvalues and 2x2 blocks [[a, -b], [b, a]] holding complex pairs a+bi,
// b > 0.  Conventions making the output deterministic:
//   - eigenvalues sorted by (Re, Im) descending, conjugates merged;
//   - each eigenvector normalized to unit length with its first significant
//     entry rotated to be real positive;
//   - a complex pair contributes columns (Im v, Re v) to the eigenvector
//     matrix, and a_hat is its inverse;
//   - the rows of a_hat belonging to one block are scaled to unit Frobenius
//     norm (a per-block positive scalar, which commutes with the block).
struct RealEigenbasis {
    Mat a_hat;
    std::vector<double> eig_moduli; // |lambda| at each basis position
    std::set<int> pair_starts;      // row index where each 2x2 block begins
    double basis_cond;              // condition estimate of the eigenvector matrix
};

RealEigenbasis real_eigenbasis(const Mat& f);

} // namespace clrt
