#include "sglpath/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace sgl {

namespace {

void check_range(const DesignMatrix& a, ColumnRange cols) {
  if (cols.begin < 0 || cols.end < cols.begin || cols.end > a.cols()) {
    throw Error("column range [" + std::to_string(cols.begin) + ", " + std::to_string(cols.end) +
                ") out of bounds for " + std::to_string(a.cols()) + " columns");
  }
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

SparseColumnMatrix::SparseColumnMatrix(Index n_rows, Index n_cols, std::vector<Index> col_ptr,
                                       std::vector<Index> row_idx, std::vector<double> values)
    : n_rows_(n_rows),
      n_cols_(n_cols),
      col_ptr_(std::move(col_ptr)),
      row_idx_(std::move(row_idx)),
      values_(std::move(values)) {
  if (n_rows < 0 || n_cols < 0) throw Error("negative matrix dimensions");
  if (static_cast<Index>(col_ptr_.size()) != n_cols + 1) {
    throw Error("col_ptr must have n_cols + 1 entries");
  }
  if (row_idx_.size() != values_.size()) throw Error("row_idx and values differ in length");
  if (col_ptr_.front() != 0 || col_ptr_.back() != static_cast<Index>(values_.size())) {
    throw Error("col_ptr must start at 0 and end at nnz");
  }
  for (Index j = 0; j < n_cols; ++j) {
    if (col_ptr_[j + 1] < col_ptr_[j]) throw Error("col_ptr must be non-decreasing");
    for (Index k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k) {
      const Index r = row_idx_[k];
      if (r < 0 || r >= n_rows) throw Error("row index out of range in column " + std::to_string(j));
      if (k > col_ptr_[j] && row_idx_[k - 1] >= r) {
        throw Error("row indices must be strictly increasing within column " + std::to_string(j));
      }
    }
  }
}

SparseColumnMatrix SparseColumnMatrix::from_triplets(Index n_rows, Index n_cols,
                                                     std::span<const Triplet> triplets) {
  if (n_rows < 0 || n_cols < 0) throw Error("negative matrix dimensions");
  std::vector<Index> order(triplets.size());
  std::iota(order.begin(), order.end(), Index{0});
  for (const auto& t : triplets) {
    if (t.row < 0 || t.row >= n_rows || t.col < 0 || t.col >= n_cols) {
      throw Error("triplet (" + std::to_string(t.row) + ", " + std::to_string(t.col) +
                  ") outside a " + std::to_string(n_rows) + "x" + std::to_string(n_cols) +
                  " matrix");
    }
  }
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    const auto& ta = triplets[a];
    const auto& tb = triplets[b];
    return ta.col != tb.col ? ta.col < tb.col : ta.row < tb.row;
  });

  std::vector<Index> col_ptr(n_cols + 1, 0);
  std::vector<Index> row_idx;
  std::vector<double> values;
  row_idx.reserve(triplets.size());
  values.reserve(triplets.size());
  Index last_col = -1;
  Index last_row = -1;
  for (Index k : order) {
    const auto& t = triplets[k];
    if (t.col == last_col && t.row == last_row) {
      values.back() += t.value;
      continue;
    }
    row_idx.push_back(t.row);
    values.push_back(t.value);
    ++col_ptr[t.col + 1];
    last_col = t.col;
    last_row = t.row;
  }
  for (Index j = 0; j < n_cols; ++j) col_ptr[j + 1] += col_ptr[j];
  return SparseColumnMatrix(n_rows, n_cols, std::move(col_ptr), std::move(row_idx),
                            std::move(values));
}

DenseMatrix::DenseMatrix(Index n_rows, Index n_cols)
    : n_rows_(n_rows), n_cols_(n_cols), values_(static_cast<std::size_t>(n_rows * n_cols), 0.0) {
  if (n_rows < 0 || n_cols < 0) throw Error("negative matrix dimensions");
}

DenseMatrix::DenseMatrix(Index n_rows, Index n_cols, std::vector<double> values)
    : n_rows_(n_rows), n_cols_(n_cols), values_(std::move(values)) {
  if (n_rows < 0 || n_cols < 0) throw Error("negative matrix dimensions");
  if (static_cast<Index>(values_.size()) != n_rows * n_cols) {
    throw Error("dense matrix needs " + std::to_string(n_rows * n_cols) + " values, got " +
                std::to_string(values_.size()));
  }
}

Index DesignMatrix::rows() const {
  return std::visit([](const auto& m) { return m.rows(); }, storage_);
}

Index DesignMatrix::cols() const {
  return std::visit([](const auto& m) { return m.cols(); }, storage_);
}

Index DesignMatrix::stored_entries() const {
  if (is_sparse()) return sparse().nnz();
  return dense().rows() * dense().cols();
}

double DesignMatrix::column_squared_norm(Index j) const {
  double s = 0.0;
  if (is_sparse()) {
    for (double v : sparse().column_values(j)) s += v * v;
  } else {
    for (double v : dense().column(j)) s += v * v;
  }
  return s;
}

DesignMatrix DesignMatrix::select_rows(std::span<const Index> rows) const {
  const Index n = this->rows();
  for (Index r : rows) {
    if (r < 0 || r >= n) throw Error("row " + std::to_string(r) + " out of range");
  }
  const auto m = static_cast<Index>(rows.size());
  if (!is_sparse()) {
    const auto& d = dense();
    DenseMatrix out(m, d.cols());
    for (Index j = 0; j < d.cols(); ++j) {
      const auto src = d.column(j);
      auto dst = out.column(j);
      for (Index i = 0; i < m; ++i) dst[i] = src[rows[i]];
    }
    return out;
  }
  // A row may be selected more than once; map each source row to its new positions.
  std::vector<std::vector<Index>> targets(static_cast<std::size_t>(n));
  for (Index i = 0; i < m; ++i) targets[rows[i]].push_back(i);
  const auto& s = sparse();
  std::vector<Index> col_ptr(s.cols() + 1, 0);
  std::vector<Index> row_idx;
  std::vector<double> values;
  std::vector<std::pair<Index, double>> column;
  for (Index j = 0; j < s.cols(); ++j) {
    column.clear();
    const auto r = s.column_rows(j);
    const auto v = s.column_values(j);
    for (std::size_t k = 0; k < r.size(); ++k) {
      for (Index t : targets[r[k]]) column.emplace_back(t, v[k]);
    }
    std::sort(column.begin(), column.end());
    for (const auto& [t, val] : column) {
      row_idx.push_back(t);
      values.push_back(val);
    }
    col_ptr[j + 1] = static_cast<Index>(values.size());
  }
  return SparseColumnMatrix(m, s.cols(), std::move(col_ptr), std::move(row_idx),
                            std::move(values));
}

DesignMatrix DesignMatrix::scale_columns(std::span<const double> scale) const {
  if (static_cast<Index>(scale.size()) != cols()) throw Error("scale length must equal n_cols");
  if (!is_sparse()) {
    DenseMatrix out = dense();
    for (Index j = 0; j < out.cols(); ++j) {
      for (double& v : out.column(j)) v *= scale[j];
    }
    return out;
  }
  const auto& s = sparse();
  std::vector<double> values(s.values().begin(), s.values().end());
  for (Index j = 0; j < s.cols(); ++j) {
    for (Index k = s.col_ptr()[j]; k < s.col_ptr()[j + 1]; ++k) values[k] *= scale[j];
  }
  return SparseColumnMatrix(s.rows(), s.cols(),
                            std::vector<Index>(s.col_ptr().begin(), s.col_ptr().end()),
                            std::vector<Index>(s.row_idx().begin(), s.row_idx().end()),
                            std::move(values));
}

DenseMatrix DesignMatrix::to_dense() const {
  if (!is_sparse()) return dense();
  const auto& s = sparse();
  DenseMatrix out(s.rows(), s.cols());
  for (Index j = 0; j < s.cols(); ++j) {
    const auto r = s.column_rows(j);
    const auto v = s.column_values(j);
    for (std::size_t k = 0; k < r.size(); ++k) out(r[k], j) = v[k];
  }
  return out;
}

SparseColumnMatrix DesignMatrix::to_sparse() const {
  if (is_sparse()) return sparse();
  const auto& d = dense();
  std::vector<Index> col_ptr(d.cols() + 1, 0);
  std::vector<Index> row_idx;
  std::vector<double> values;
  for (Index j = 0; j < d.cols(); ++j) {
    const auto col = d.column(j);
    for (Index i = 0; i < d.rows(); ++i) {
      if (col[i] != 0.0) {
        row_idx.push_back(i);
        values.push_back(col[i]);
      }
    }
    col_ptr[j + 1] = static_cast<Index>(values.size());
  }
  return SparseColumnMatrix(d.rows(), d.cols(), std::move(col_ptr), std::move(row_idx),
                            std::move(values));
}

std::vector<double> matvec(const DesignMatrix& a, std::span<const double> x) {
  if (static_cast<Index>(x.size()) != a.cols()) {
    throw Error("matvec: vector length " + std::to_string(x.size()) + " != n_cols " +
                std::to_string(a.cols()));
  }
  return group_columns_matvec(a, {0, a.cols()}, x);
}

std::vector<double> matvec_transpose(const DesignMatrix& a, std::span<const double> y) {
  return group_columns_rmatvec(a, {0, a.cols()}, y);
}

std::vector<double> group_columns_matvec(const DesignMatrix& a, ColumnRange cols,
                                         std::span<const double> x_g) {
  check_range(a, cols);
  if (static_cast<Index>(x_g.size()) != cols.size()) {
    throw Error("group matvec: vector length " + std::to_string(x_g.size()) +
                " != group size " + std::to_string(cols.size()));
  }
  std::vector<double> out(static_cast<std::size_t>(a.rows()), 0.0);
  for (Index j = cols.begin; j < cols.end; ++j) {
    const double xj = x_g[j - cols.begin];
    if (xj != 0.0) a.column_axpy(j, xj, out);
  }
  return out;
}

std::vector<double> group_columns_rmatvec(const DesignMatrix& a, ColumnRange cols,
                                          std::span<const double> y) {
  check_range(a, cols);
  if (static_cast<Index>(y.size()) != a.rows()) {
    throw Error("transpose matvec: vector length " + std::to_string(y.size()) + " != n_rows " +
                std::to_string(a.rows()));
  }
  std::vector<double> out(static_cast<std::size_t>(cols.size()));
  for (Index j = cols.begin; j < cols.end; ++j) out[j - cols.begin] = a.column_dot(j, y);
  return out;
}

LipschitzEstimate group_lipschitz(const DesignMatrix& a, ColumnRange cols, double scale,
                                  double tol, int max_iter) {
  check_range(a, cols);
  if (!(tol > 0.0) || max_iter < 1 || !(scale > 0.0)) {
    throw Error("group_lipschitz needs tol > 0, max_iter >= 1, scale > 0");
  }
  constexpr double kInflation = 1.0 + 1e-10;
  const Index k = cols.size();
  if (k == 0) return {0.0, 0, true};

  double frobenius = 0.0;
  for (Index j = cols.begin; j < cols.end; ++j) frobenius += a.column_squared_norm(j);
  frobenius *= scale;
  if (frobenius == 0.0) return {0.0, 0, true};
  if (k == 1) return {frobenius * kInflation, 1, true};

  // v <- scale * G^T G v, returns the Rayleigh quotient for unit v.
  auto apply = [&](std::vector<double>& v) {
    const auto gv = group_columns_matvec(a, cols, v);
    auto w = group_columns_rmatvec(a, cols, gv);
    double rq = 0.0;
    for (Index i = 0; i < k; ++i) {
      w[i] *= scale;
      rq += w[i] * v[i];
    }
    v = std::move(w);
    return rq;
  };
  auto normalize = [](std::vector<double>& v) {
    const double nrm = norm2(v);
    if (nrm > 0.0) {
      for (double& x : v) x /= nrm;
    }
    return nrm;
  };

  std::vector<double> v(static_cast<std::size_t>(k), 1.0);
  normalize(v);
  double estimate = apply(v);
  if (!(estimate > 0.0)) {
    std::mt19937_64 rng(0x5eed5eedULL);
    std::normal_distribution<double> normal;
    for (double& x : v) x = normal(rng);
    normalize(v);
    estimate = apply(v);
  }
  for (int it = 1; it <= max_iter; ++it) {
    if (normalize(v) == 0.0) break;
    const double next = apply(v);
    if (std::abs(next - estimate) <= tol * next) {
      return {next * kInflation, it, true};
    }
    estimate = next;
  }
  return {frobenius * kInflation, max_iter, false};
}

}  // namespace sgl
