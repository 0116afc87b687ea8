#pragma once

#include <cstddef>
#include <vector>

#include "clrt/interval.hpp"

namespace clrt {

// Interval vector.
struct IVector {
    std::vector<Interval> e;

    IVector() = default;
    explicit IVector(std::size_t n) : e(n) {}

    std::size_t size() const { return e.size(); }
    Interval& operator[](std::size_t i) { return e[i]; }
    const Interval& operator[](std::size_t i) const { return e[i]; }
};

// Interval matrix, row-major.
struct IMatrix {
    std::vector<Interval> e;

    IMatrix() = default;
    IMatrix(std::size_t r, std::size_t c) : e(r * c), rows_(r), cols_(c) {}

    static IMatrix identity(std::size_t n) {
        IMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m.at(i, i) = Interval(1.0);
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    Interval& at(std::size_t r, std::size_t c) { return e[r * cols_ + c]; }
    const Interval& at(std::size_t r, std::size_t c) const { return e[r * cols_ + c]; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
};

inline void check_same_size(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw DimensionMismatch(std::string(what) + ": " + std::to_string(a) +
                                " vs " + std::to_string(b));
    }
}

// --- vector ops ----------------------------------------------------------------

inline IVector operator+(const IVector& a, const IVector& b) {
    check_same_size(a.size(), b.size(), "vector add");
    IVector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline IVector operator-(const IVector& a, const IVector& b) {
    check_same_size(a.size(), b.size(), "vector sub");
    IVector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline IVector operator*(const Interval& s, const IVector& a) {
    IVector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = s * a[i];
    return r;
}

inline IVector hull(const IVector& a, const IVector& b) {
    check_same_size(a.size(), b.size(), "vector hull");
    IVector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = hull(a[i], b[i]);
    return r;
}

inline bool contains(const IVector& a, const IVector& b) {
    check_same_size(a.size(), b.size(), "vector contains");
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!contains(a[i], b[i])) return false;
    }
    return true;
}

inline double max_width(const IVector& a) {
    double w = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) w = std::max(w, width(a[i]));
    return w;
}

// Upper bound on the Euclidean norm of every vector in the box.
inline Interval norm2(const IVector& a) {
    Interval s(0.0);
    for (std::size_t i = 0; i < a.size(); ++i) s += powi(a[i], 2);
    return sqrt(s);
}

// --- matrix ops ----------------------------------------------------------------

inline IVector matvec(const IMatrix& m, const IVector& v) {
    check_same_size(m.cols(), v.size(), "matvec");
    IVector r(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        Interval s(0.0);
        for (std::size_t j = 0; j < m.cols(); ++j) s += m.at(i, j) * v[j];
        r[i] = s;
    }
    return r;
}

inline IMatrix matmul(const IMatrix& a, const IMatrix& b) {
    check_same_size(a.cols(), b.rows(), "matmul");
    IMatrix r(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            Interval s(0.0);
            for (std::size_t k = 0; k < a.cols(); ++k) s += a.at(i, k) * b.at(k, j);
            r.at(i, j) = s;
        }
    }
    return r;
}

inline IMatrix transpose(const IMatrix& m) {
    IMatrix r(m.cols(), m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) r.at(j, i) = m.at(i, j);
    }
    return r;
}

inline IMatrix operator+(const IMatrix& a, const IMatrix& b) {
    check_same_size(a.rows(), b.rows(), "matrix add rows");
    check_same_size(a.cols(), b.cols(), "matrix add cols");
    IMatrix r(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.e.size(); ++i) r.e[i] = a.e[i] + b.e[i];
    return r;
}

inline IMatrix operator-(const IMatrix& a, const IMatrix& b) {
    check_same_size(a.rows(), b.rows(), "matrix sub rows");
    check_same_size(a.cols(), b.cols(), "matrix sub cols");
    IMatrix r(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.e.size(); ++i) r.e[i] = a.e[i] - b.e[i];
    return r;
}

inline IMatrix operator*(const Interval& s, const IMatrix& a) {
    IMatrix r(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.e.size(); ++i) r.e[i] = s * a.e[i];
    return r;
}

inline IMatrix hull(const IMatrix& a, const IMatrix& b) {
    check_same_size(a.rows(), b.rows(), "matrix hull rows");
    check_same_size(a.cols(), b.cols(), "matrix hull cols");
    IMatrix r(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.e.size(); ++i) r.e[i] = hull(a.e[i], b.e[i]);
    return r;
}

inline bool contains(const IMatrix& a, const IMatrix& b) {
    check_same_size(a.rows(), b.rows(), "matrix contains rows");
    check_same_size(a.cols(), b.cols(), "matrix contains cols");
    for (std::size_t i = 0; i < a.e.size(); ++i) {
        if (!contains(a.e[i], b.e[i])) return false;
    }
    return true;
}

inline double max_width(const IMatrix& a) {
    double w = 0.0;
    for (std::size_t i = 0; i < a.e.size(); ++i) w = std::max(w, width(a.e[i]));
    return w;
}

} // namespace clrt
