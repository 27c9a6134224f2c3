#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace sgl {

using Index = std::int64_t;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Half-open interval [begin, end) of column indices.
struct ColumnRange {
  Index begin = 0;
  Index end = 0;

  Index size() const { return end - begin; }
  bool empty() const { return end == begin; }
};

struct Triplet {
  Index row;
  Index col;
  double value;
};

/**
 * Compressed sparse column matrix.
 *
 * Row indices inside a column are strictly increasing. Indices are 64-bit so
 * designs with more than 2^31 stored entries can be represented.
 */
class SparseColumnMatrix {
 public:
  SparseColumnMatrix() : col_ptr_(1, 0) {}
  SparseColumnMatrix(Index n_rows, Index n_cols, std::vector<Index> col_ptr,
                     std::vector<Index> row_idx, std::vector<double> values);

  /// Builds from (row, col, value) triplets in any order. Duplicates are summed.
  static SparseColumnMatrix from_triplets(Index n_rows, Index n_cols,
                                          std::span<const Triplet> triplets);

  Index rows() const { return n_rows_; }
  Index cols() const { return n_cols_; }
  Index nnz() const { return static_cast<Index>(values_.size()); }

  std::span<const Index> col_ptr() const { return col_ptr_; }
  std::span<const Index> row_idx() const { return row_idx_; }
  std::span<const double> values() const { return values_; }

  std::span<const Index> column_rows(Index j) const {
    return {row_idx_.data() + col_ptr_[j], static_cast<std::size_t>(col_ptr_[j + 1] - col_ptr_[j])};
  }
  std::span<const double> column_values(Index j) const {
    return {values_.data() + col_ptr_[j], static_cast<std::size_t>(col_ptr_[j + 1] - col_ptr_[j])};
  }

 private:
  Index n_rows_ = 0;
  Index n_cols_ = 0;
  std::vector<Index> col_ptr_;
  std::vector<Index> row_idx_;
  std::vector<double> values_;
};

/// Column-major dense matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(Index n_rows, Index n_cols);
  DenseMatrix(Index n_rows, Index n_cols, std::vector<double> values);

  Index rows() const { return n_rows_; }
  Index cols() const { return n_cols_; }

  double operator()(Index i, Index j) const { return values_[j * n_rows_ + i]; }
  double& operator()(Index i, Index j) { return values_[j * n_rows_ + i]; }

  std::span<const double> column(Index j) const {
    return {values_.data() + j * n_rows_, static_cast<std::size_t>(n_rows_)};
  }
  std::span<double> column(Index j) {
    return {values_.data() + j * n_rows_, static_cast<std::size_t>(n_rows_)};
  }
  std::span<const double> values() const { return values_; }

 private:
  Index n_rows_ = 0;
  Index n_cols_ = 0;
  std::vector<double> values_;
};

/**
 * The design matrix X, stored either sparse or dense.
 *
 * All kernels traverse rows in increasing order within a column and columns
 * in increasing order, so a sparse matrix and its dense expansion produce
 * bit-identical results (the dense path only adds exact zeros).
 */
class DesignMatrix {
 public:
  DesignMatrix() = default;
  DesignMatrix(SparseColumnMatrix m) : storage_(std::move(m)) {}
  DesignMatrix(DenseMatrix m) : storage_(std::move(m)) {}

  Index rows() const;
  Index cols() const;
  bool is_sparse() const { return std::holds_alternative<SparseColumnMatrix>(storage_); }

  const SparseColumnMatrix& sparse() const { return std::get<SparseColumnMatrix>(storage_); }
  const DenseMatrix& dense() const { return std::get<DenseMatrix>(storage_); }

  /// Number of stored entries (n_rows * n_cols for dense storage).
  Index stored_entries() const;

  /// x_j^T y
  double column_dot(Index j, std::span<const double> y) const {
    double s = 0.0;
    if (const auto* sp = std::get_if<SparseColumnMatrix>(&storage_)) {
      const auto rows = sp->column_rows(j);
      const auto vals = sp->column_values(j);
      for (std::size_t k = 0; k < rows.size(); ++k) s += vals[k] * y[rows[k]];
    } else {
      const auto col = std::get<DenseMatrix>(storage_).column(j);
      for (std::size_t i = 0; i < col.size(); ++i) s += col[i] * y[i];
    }
    return s;
  }

  /// y += a * x_j
  void column_axpy(Index j, double a, std::span<double> y) const {
    if (const auto* sp = std::get_if<SparseColumnMatrix>(&storage_)) {
      const auto rows = sp->column_rows(j);
      const auto vals = sp->column_values(j);
      for (std::size_t k = 0; k < rows.size(); ++k) y[rows[k]] += a * vals[k];
    } else {
      const auto col = std::get<DenseMatrix>(storage_).column(j);
      for (std::size_t i = 0; i < col.size(); ++i) y[i] += a * col[i];
    }
  }

  /// Sum of squares of column j.
  double column_squared_norm(Index j) const;

  /// Copies the listed rows (in the given order) into a new matrix of the same kind.
  DesignMatrix select_rows(std::span<const Index> rows) const;

  /// Returns X * diag(scale).
  DesignMatrix scale_columns(std::span<const double> scale) const;

  DenseMatrix to_dense() const;
  SparseColumnMatrix to_sparse() const;

 private:
  std::variant<SparseColumnMatrix, DenseMatrix> storage_;
};

std::vector<double> matvec(const DesignMatrix& a, std::span<const double> x);
std::vector<double> matvec_transpose(const DesignMatrix& a, std::span<const double> y);

/// X[:, cols] * x_g without forming the submatrix.
std::vector<double> group_columns_matvec(const DesignMatrix& a, ColumnRange cols,
                                         std::span<const double> x_g);
/// X[:, cols]^T * y without forming the submatrix.
std::vector<double> group_columns_rmatvec(const DesignMatrix& a, ColumnRange cols,
                                          std::span<const double> y);

struct LipschitzEstimate {
  double value = 0.0;
  int iterations = 0;
  /// False when power iteration did not converge and the Frobenius bound was used.
  bool converged = true;
};

/**
 * Largest eigenvalue of scale * G^T G, G = X[:, cols], by power iteration.
 *
 * Starts from the normalized all-ones vector (a fixed pseudorandom vector if
 * that one is orthogonal to the leading eigenspace). The result is inflated by
 * a factor (1 + 1e-10). If max_iter is reached the squared Frobenius norm of G
 * times scale is returned instead, which always dominates.
 */
LipschitzEstimate group_lipschitz(const DesignMatrix& a, ColumnRange cols, double scale,
                                  double tol = 1e-6, int max_iter = 500);

}  // namespace sgl
