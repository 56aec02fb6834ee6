#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace hardy {

struct Triplet {
    std::size_t row, col;
    double value;
};

/// Symmetric sparse matrix in compressed-row form, assembled from
/// deduplicated triplets. Immutable after construction; matvec is safe for
/// concurrent use.
class SparseOperator {
public:
    SparseOperator() = default;

    SparseOperator(std::size_t dim, std::vector<Triplet> triplets) : dim_(dim) {
        std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
            return a.row != b.row ? a.row < b.row : a.col < b.col;
        });
        row_ptr_.assign(dim + 1, 0);
        for (std::size_t i = 0; i < triplets.size(); ++i) {
            if (triplets[i].row >= dim || triplets[i].col >= dim)
                throw std::out_of_range("SparseOperator: triplet outside matrix");
            if (i > 0 && triplets[i].row == triplets[i - 1].row &&
                triplets[i].col == triplets[i - 1].col) {
                vals_.back() += triplets[i].value;
            } else {
                cols_.push_back(triplets[i].col);
                vals_.push_back(triplets[i].value);
                ++row_ptr_[triplets[i].row + 1];
            }
        }
        for (std::size_t r = 0; r < dim; ++r) row_ptr_[r + 1] += row_ptr_[r];
    }

    std::size_t dim() const { return dim_; }
    std::size_t nnz() const { return vals_.size(); }

    void matvec(std::span<const double> x, std::span<double> y) const {
        for (std::size_t r = 0; r < dim_; ++r) {
            double s = 0;
            for (std::size_t j = row_ptr_[r]; j < row_ptr_[r + 1]; ++j)
                s += vals_[j] * x[cols_[j]];
            y[r] = s;
        }
    }

    std::vector<double> apply(std::span<const double> x) const {
        std::vector<double> y(dim_);
        matvec(x, y);
        return y;
    }

    double quadratic_form(std::span<const double> u) const {
        double s = 0;
        for (std::size_t r = 0; r < dim_; ++r) {
            double row = 0;
            for (std::size_t j = row_ptr_[r]; j < row_ptr_[r + 1]; ++j)
                row += vals_[j] * u[cols_[j]];
            s += u[r] * row;
        }
        return s;
    }

    std::vector<double> diagonal() const {
        std::vector<double> d(dim_, 0.0);
        for (std::size_t r = 0; r < dim_; ++r)
            for (std::size_t j = row_ptr_[r]; j < row_ptr_[r + 1]; ++j)
                if (cols_[j] == r) d[r] += vals_[j];
        return d;
    }

    bool is_diagonal() const {
        for (std::size_t r = 0; r < dim_; ++r)
            for (std::size_t j = row_ptr_[r]; j < row_ptr_[r + 1]; ++j)
                if (cols_[j] != r && vals_[j] != 0.0) return false;
        return true;
    }

    /// Exact structural symmetry check at the stored-entry level.
    bool is_symmetric(double tol = 0.0) const {
        for (std::size_t r = 0; r < dim_; ++r)
            for (std::size_t j = row_ptr_[r]; j < row_ptr_[r + 1]; ++j) {
                const std::size_t c = cols_[j];
                const double v = vals_[j];
                bool found = false;
                for (std::size_t j2 = row_ptr_[c]; j2 < row_ptr_[c + 1]; ++j2)
                    if (cols_[j2] == r) {
                        if (std::abs(vals_[j2] - v) > tol) return false;
                        found = true;
                    }
                if (!found && v != 0.0) return false;
            }
        return true;
    }

    /// Entries as sorted triplets (row, col, value); the dump format.
    std::vector<Triplet> triplets() const {
        std::vector<Triplet> out;
        out.reserve(vals_.size());
        for (std::size_t r = 0; r < dim_; ++r)
            for (std::size_t j = row_ptr_[r]; j < row_ptr_[r + 1]; ++j)
                out.push_back({r, cols_[j], vals_[j]});
        return out;
    }

private:
    std::size_t dim_ = 0;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::size_t> cols_;
    std::vector<double> vals_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace hardy
