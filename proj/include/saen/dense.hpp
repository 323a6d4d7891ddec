#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "saen/errors.hpp"
#include "saen/sparse.hpp"

namespace saen {

// Row-major dense double matrix. All network-side algebra runs through this
// type; products are plain loops, which is plenty at the layer widths the
// per-level nets use (single digits to low tens of columns).
class DenseMatrix {
public:
    DenseMatrix() : rows_(0), cols_(0) {}
    DenseMatrix(Index rows, Index cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
        if (rows < 0 || cols < 0) throw ArgumentError("DenseMatrix: negative shape");
    }

    Index rows() const { return rows_; }
    Index cols() const { return cols_; }

    double& operator()(Index r, Index c) { return data_[r * cols_ + c]; }
    double operator()(Index r, Index c) const { return data_[r * cols_ + c]; }

    std::span<double> row(Index r) { return {data_.data() + r * cols_, static_cast<std::size_t>(cols_)}; }
    std::span<const double> row(Index r) const {
        return {data_.data() + r * cols_, static_cast<std::size_t>(cols_)};
    }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

private:
    Index rows_;
    Index cols_;
    std::vector<double> data_;
};

// out = a * b
inline DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows()) throw ArgumentError("matmul: inner dimension mismatch");
    DenseMatrix out(a.rows(), b.cols());
    for (Index i = 0; i < a.rows(); ++i) {
        auto ai = a.row(i);
        auto oi = out.row(i);
        for (Index k = 0; k < a.cols(); ++k) {
            const double v = ai[k];
            if (v == 0.0) continue;
            auto bk = b.row(k);
            for (Index j = 0; j < b.cols(); ++j) oi[j] += v * bk[j];
        }
    }
    return out;
}

// out = a^T * b  (a: n x p, b: n x q, out: p x q)
inline DenseMatrix matmul_at_b(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows()) throw ArgumentError("matmul_at_b: row count mismatch");
    DenseMatrix out(a.cols(), b.cols());
    for (Index i = 0; i < a.rows(); ++i) {
        auto ai = a.row(i);
        auto bi = b.row(i);
        for (Index k = 0; k < a.cols(); ++k) {
            const double v = ai[k];
            if (v == 0.0) continue;
            auto ok = out.row(k);
            for (Index j = 0; j < b.cols(); ++j) ok[j] += v * bi[j];
        }
    }
    return out;
}

// out = a * b^T  (a: n x q, b: p x q, out: n x p)
inline DenseMatrix matmul_a_bt(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.cols()) throw ArgumentError("matmul_a_bt: column count mismatch");
    DenseMatrix out(a.rows(), b.rows());
    for (Index i = 0; i < a.rows(); ++i) {
        auto ai = a.row(i);
        auto oi = out.row(i);
        for (Index j = 0; j < b.rows(); ++j) {
            auto bj = b.row(j);
            double acc = 0.0;
            for (Index k = 0; k < a.cols(); ++k) acc += ai[k] * bj[k];
            oi[j] = acc;
        }
    }
    return out;
}

// dst[:, col_offset : col_offset + h.cols()] += r * h
inline void add_sparse_dense_product(const SparseDouble& r, const DenseMatrix& h, DenseMatrix& dst,
                                     Index col_offset) {
    if (r.cols() != h.rows()) throw ArgumentError("sparse-dense product: inner dimension mismatch");
    if (r.rows() != dst.rows() || col_offset + h.cols() > dst.cols())
        throw ArgumentError("sparse-dense product: output block out of range");
    for (Index i = 0; i < r.rows(); ++i) {
        auto cs = r.row_cols(i);
        auto vs = r.row_vals(i);
        auto di = dst.row(i);
        for (std::size_t k = 0; k < cs.size(); ++k) {
            const double v = vs[k];
            auto hr = h.row(cs[k]);
            for (Index j = 0; j < h.cols(); ++j) di[col_offset + j] += v * hr[j];
        }
    }
}

// dst += r^T * grad[:, col_offset : col_offset + dst.cols()]
inline void add_sparse_transpose_product(const SparseDouble& r, const DenseMatrix& grad,
                                         DenseMatrix& dst, Index col_offset) {
    if (r.rows() != grad.rows()) throw ArgumentError("sparse-transpose product: row count mismatch");
    if (r.cols() != dst.rows() || col_offset + dst.cols() > grad.cols())
        throw ArgumentError("sparse-transpose product: output block out of range");
    for (Index i = 0; i < r.rows(); ++i) {
        auto cs = r.row_cols(i);
        auto vs = r.row_vals(i);
        auto gi = grad.row(i);
        for (std::size_t k = 0; k < cs.size(); ++k) {
            const double v = vs[k];
            auto dj = dst.row(cs[k]);
            for (Index j = 0; j < dst.cols(); ++j) dj[j] += v * gi[col_offset + j];
        }
    }
}

} // namespace saen
