#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <tuple>
#include <vector>

#include "saen/errors.hpp"
#include "saen/rational.hpp"

namespace saen {

using Index = std::int64_t;

inline bool value_is_zero(std::int64_t v) { return v == 0; }
inline bool value_is_zero(double v) { return v == 0.0; }
inline bool value_is_zero(const Rational& v) { return v.num == 0; }

// Row-major compressed sparse rows with sorted, duplicate-free column indices
// per row. The sorted canonical form is what makes row hashing and exact row
// equality in compute_cd well defined.
template <typename T>
class CsrMatrix {
public:
    CsrMatrix() : rows_(0), cols_(0), row_ptr_(1, 0) {}

    CsrMatrix(Index rows, Index cols) : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {
        if (rows < 0 || cols < 0) throw ArgumentError("CsrMatrix: negative shape");
    }

    struct Triplet {
        Index row;
        Index col;
        T value;
    };

    static CsrMatrix from_triplets(Index rows, Index cols, std::vector<Triplet> entries) {
        CsrMatrix m(rows, cols);
        std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
            return std::tie(a.row, a.col) < std::tie(b.row, b.col);
        });
        for (std::size_t i = 0; i < entries.size();) {
            const Triplet& e = entries[i];
            if (e.row < 0 || e.row >= rows || e.col < 0 || e.col >= cols)
                throw ArgumentError("CsrMatrix::from_triplets: entry out of bounds");
            T v = e.value;
            std::size_t j = i + 1;
            while (j < entries.size() && entries[j].row == e.row && entries[j].col == e.col) {
                v = v + entries[j].value;
                ++j;
            }
            if (!value_is_zero(v)) {
                m.row_ptr_[e.row + 1]++;
                m.col_idx_.push_back(e.col);
                m.values_.push_back(v);
            }
            i = j;
        }
        for (Index r = 0; r < rows; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
        return m;
    }

    static CsrMatrix from_dense(const std::vector<std::vector<T>>& dense, Index cols = -1) {
        const Index rows = static_cast<Index>(dense.size());
        if (cols < 0) cols = rows > 0 ? static_cast<Index>(dense[0].size()) : 0;
        std::vector<Triplet> entries;
        for (Index r = 0; r < rows; ++r) {
            if (static_cast<Index>(dense[r].size()) != cols)
                throw ArgumentError("CsrMatrix::from_dense: ragged rows");
            for (Index c = 0; c < cols; ++c)
                if (!value_is_zero(dense[r][c])) entries.push_back({r, c, dense[r][c]});
        }
        return from_triplets(rows, cols, std::move(entries));
    }

    Index rows() const { return rows_; }
    Index cols() const { return cols_; }
    Index nnz() const { return static_cast<Index>(values_.size()); }

    std::span<const Index> row_cols(Index r) const {
        return {col_idx_.data() + row_ptr_[r], static_cast<std::size_t>(row_ptr_[r + 1] - row_ptr_[r])};
    }
    std::span<const T> row_vals(Index r) const {
        return {values_.data() + row_ptr_[r], static_cast<std::size_t>(row_ptr_[r + 1] - row_ptr_[r])};
    }
    Index row_nnz(Index r) const { return row_ptr_[r + 1] - row_ptr_[r]; }

    const std::vector<Index>& row_ptr() const { return row_ptr_; }
    const std::vector<Index>& col_idx() const { return col_idx_; }
    const std::vector<T>& values() const { return values_; }

    bool operator==(const CsrMatrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_ && row_ptr_ == other.row_ptr_ &&
               col_idx_ == other.col_idx_ && values_ == other.values_;
    }

    std::vector<std::vector<T>> to_dense() const {
        std::vector<std::vector<T>> out(rows_, std::vector<T>(cols_, T{}));
        for (Index r = 0; r < rows_; ++r) {
            auto cs = row_cols(r);
            auto vs = row_vals(r);
            for (std::size_t k = 0; k < cs.size(); ++k) out[r][cs[k]] = vs[k];
        }
        return out;
    }

    bool rows_equal(Index a, Index b) const {
        return row_nnz(a) == row_nnz(b) &&
               std::equal(row_cols(a).begin(), row_cols(a).end(), row_cols(b).begin()) &&
               std::equal(row_vals(a).begin(), row_vals(a).end(), row_vals(b).begin());
    }

    // Maps every column i to col_map[i] (a surjection onto [0, new_cols)) and
    // sums entries that land on the same target column. This is exactly
    // right-multiplication by a selector matrix D with one 1 per row.
    CsrMatrix remap_columns(Index new_cols, std::span<const Index> col_map) const {
        if (static_cast<Index>(col_map.size()) != cols_)
            throw ArgumentError("remap_columns: col_map size mismatch");
        for (Index c : col_map)
            if (c < 0 || c >= new_cols) throw ArgumentError("remap_columns: target column out of range");
        CsrMatrix out;
        out.rows_ = rows_;
        out.cols_ = new_cols;
        out.row_ptr_.assign(rows_ + 1, 0);
        std::vector<std::pair<Index, T>> scratch;
        for (Index r = 0; r < rows_; ++r) {
            scratch.clear();
            auto cs = row_cols(r);
            auto vs = row_vals(r);
            for (std::size_t k = 0; k < cs.size(); ++k) scratch.emplace_back(col_map[cs[k]], vs[k]);
            std::sort(scratch.begin(), scratch.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            for (std::size_t k = 0; k < scratch.size();) {
                T v = scratch[k].second;
                std::size_t j = k + 1;
                while (j < scratch.size() && scratch[j].first == scratch[k].first) {
                    v = v + scratch[j].second;
                    ++j;
                }
                if (!value_is_zero(v)) {
                    out.col_idx_.push_back(scratch[k].first);
                    out.values_.push_back(v);
                }
                k = j;
            }
            out.row_ptr_[r + 1] = static_cast<Index>(out.col_idx_.size());
        }
        return out;
    }

    CsrMatrix take_rows(std::span<const Index> which) const {
        CsrMatrix out;
        out.rows_ = static_cast<Index>(which.size());
        out.cols_ = cols_;
        out.row_ptr_.assign(out.rows_ + 1, 0);
        for (std::size_t i = 0; i < which.size(); ++i) {
            const Index r = which[i];
            if (r < 0 || r >= rows_) throw ArgumentError("take_rows: row index out of range");
            auto cs = row_cols(r);
            auto vs = row_vals(r);
            out.col_idx_.insert(out.col_idx_.end(), cs.begin(), cs.end());
            out.values_.insert(out.values_.end(), vs.begin(), vs.end());
            out.row_ptr_[i + 1] = static_cast<Index>(out.col_idx_.size());
        }
        return out;
    }

    static CsrMatrix hconcat(std::span<const CsrMatrix> parts) {
        if (parts.empty()) throw ArgumentError("hconcat: no parts");
        const Index rows = parts[0].rows();
        Index cols = 0;
        for (const auto& p : parts) {
            if (p.rows() != rows) throw ArgumentError("hconcat: row count mismatch");
            cols += p.cols();
        }
        CsrMatrix out;
        out.rows_ = rows;
        out.cols_ = cols;
        out.row_ptr_.assign(rows + 1, 0);
        for (Index r = 0; r < rows; ++r) {
            Index offset = 0;
            for (const auto& p : parts) {
                auto cs = p.row_cols(r);
                auto vs = p.row_vals(r);
                for (std::size_t k = 0; k < cs.size(); ++k) {
                    out.col_idx_.push_back(cs[k] + offset);
                    out.values_.push_back(vs[k]);
                }
                offset += p.cols();
            }
            out.row_ptr_[r + 1] = static_cast<Index>(out.col_idx_.size());
        }
        return out;
    }

    template <typename U>
    CsrMatrix<U> cast() const {
        typename std::vector<typename CsrMatrix<U>::Triplet> entries;
        entries.reserve(values_.size());
        for (Index r = 0; r < rows_; ++r) {
            auto cs = row_cols(r);
            auto vs = row_vals(r);
            for (std::size_t k = 0; k < cs.size(); ++k)
                entries.push_back({r, cs[k], static_cast<U>(vs[k])});
        }
        return CsrMatrix<U>::from_triplets(rows_, cols_, std::move(entries));
    }

private:
    Index rows_;
    Index cols_;
    std::vector<Index> row_ptr_;
    std::vector<Index> col_idx_;
    std::vector<T> values_;

    template <typename U>
    friend class CsrMatrix;
};

using SparseInt = CsrMatrix<std::int64_t>;
using SparseDouble = CsrMatrix<double>;
using SparseRational = CsrMatrix<Rational>;

// Exact sparse-sparse product; used by the compression identities
// (C*D = I, C*M = M^comp, D*M^comp = M) and nowhere on the hot path.
template <typename TA, typename TB, typename TC = decltype(TA{} * TB{})>
CsrMatrix<TC> multiply(const CsrMatrix<TA>& a, const CsrMatrix<TB>& b) {
    if (a.cols() != b.rows()) throw ArgumentError("multiply: inner dimension mismatch");
    std::vector<typename CsrMatrix<TC>::Triplet> entries;
    std::vector<TC> acc(b.cols(), TC{});
    std::vector<Index> touched;
    for (Index r = 0; r < a.rows(); ++r) {
        touched.clear();
        auto acs = a.row_cols(r);
        auto avs = a.row_vals(r);
        for (std::size_t k = 0; k < acs.size(); ++k) {
            const Index mid = acs[k];
            auto bcs = b.row_cols(mid);
            auto bvs = b.row_vals(mid);
            for (std::size_t j = 0; j < bcs.size(); ++j) {
                if (value_is_zero(acc[bcs[j]])) touched.push_back(bcs[j]);
                acc[bcs[j]] = acc[bcs[j]] + TC(avs[k]) * TC(bvs[j]);
            }
        }
        for (Index c : touched) {
            if (!value_is_zero(acc[c])) entries.push_back({r, c, acc[c]});
            acc[c] = TC{};
        }
    }
    return CsrMatrix<TC>::from_triplets(a.rows(), b.cols(), std::move(entries));
}

template <typename T>
CsrMatrix<T> identity_csr(Index n) {
    std::vector<typename CsrMatrix<T>::Triplet> entries;
    entries.reserve(n);
    for (Index i = 0; i < n; ++i) entries.push_back({i, i, T(1)});
    return CsrMatrix<T>::from_triplets(n, n, std::move(entries));
}

} // namespace saen
