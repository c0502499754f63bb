#include "gcnfair/sparse.hpp"

#include <algorithm>
#include <unordered_map>

#include "gcnfair/error.hpp"

namespace gcnfair {

CsrMatrix::CsrMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
                     std::vector<std::size_t> col_idx, std::vector<double> values)
    : rows_(rows),
      cols_(cols),
      row_ptr_(std::move(row_ptr)),
      col_idx_(std::move(col_idx)),
      values_(std::move(values)) {
  if (row_ptr_.size() != rows_ + 1 || col_idx_.size() != values_.size() ||
      row_ptr_.back() != values_.size()) {
    throw Error(ErrorCode::invalid_argument, "inconsistent CSR arrays");
  }
}

CsrMatrix CsrMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                   std::vector<Triplet> triplets) {
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<std::size_t> row_ptr(rows + 1, 0);
  std::vector<std::size_t> col_idx;
  std::vector<double> values;
  col_idx.reserve(triplets.size());
  values.reserve(triplets.size());
  for (std::size_t k = 0; k < triplets.size(); ++k) {
    const auto& t = triplets[k];
    if (t.row >= rows || t.col >= cols) {
      throw Error(ErrorCode::out_of_range, "triplet outside matrix bounds");
    }
    if (!col_idx.empty() && k > 0 && triplets[k - 1].row == t.row &&
        triplets[k - 1].col == t.col) {
      values.back() += t.value;
      continue;
    }
    col_idx.push_back(t.col);
    values.push_back(t.value);
    ++row_ptr[t.row + 1];
  }
  for (std::size_t r = 0; r < rows; ++r) row_ptr[r + 1] += row_ptr[r];
  return CsrMatrix(rows, cols, std::move(row_ptr), std::move(col_idx), std::move(values));
}

double CsrMatrix::coeff(std::size_t r, std::size_t c) const {
  const auto first = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r]);
  const auto last = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r + 1]);
  const auto it = std::lower_bound(first, last, c);
  if (it == last || *it != c) return 0.0;
  return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

Eigen::MatrixXd CsrMatrix::multiply(const Eigen::MatrixXd& x) const {
  if (static_cast<std::size_t>(x.rows()) != cols_) {
    throw Error(ErrorCode::dimension_mismatch, "CSR multiply: inner dimension mismatch");
  }
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows_), x.cols());
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      y.row(static_cast<Eigen::Index>(r)) +=
          values_[k] * x.row(static_cast<Eigen::Index>(col_idx_[k]));
    }
  }
  return y;
}

Eigen::VectorXd CsrMatrix::multiply(const Eigen::VectorXd& x) const {
  if (static_cast<std::size_t>(x.size()) != cols_) {
    throw Error(ErrorCode::dimension_mismatch, "CSR multiply: inner dimension mismatch");
  }
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows_));
  for (std::size_t r = 0; r < rows_; ++r) {
    double acc = 0.0;
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      acc += values_[k] * x[static_cast<Eigen::Index>(col_idx_[k])];
    }
    y[static_cast<Eigen::Index>(r)] = acc;
  }
  return y;
}

Eigen::MatrixXd CsrMatrix::multiply_transpose(const Eigen::MatrixXd& x) const {
  if (static_cast<std::size_t>(x.rows()) != rows_) {
    throw Error(ErrorCode::dimension_mismatch, "CSR transpose multiply: dimension mismatch");
  }
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(cols_), x.cols());
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      y.row(static_cast<Eigen::Index>(col_idx_[k])) +=
          values_[k] * x.row(static_cast<Eigen::Index>(r));
    }
  }
  return y;
}

Eigen::VectorXd CsrMatrix::multiply_transpose(const Eigen::VectorXd& x) const {
  if (static_cast<std::size_t>(x.size()) != rows_) {
    throw Error(ErrorCode::dimension_mismatch, "CSR transpose multiply: dimension mismatch");
  }
  Eigen::VectorXd y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cols_));
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      y[static_cast<Eigen::Index>(col_idx_[k])] += values_[k] * x[static_cast<Eigen::Index>(r)];
    }
  }
  return y;
}

Eigen::MatrixXd CsrMatrix::to_dense() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows_),
                                            static_cast<Eigen::Index>(cols_));
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col_idx_[k])) = values_[k];
    }
  }
  return m;
}

CsrMatrix CsrMatrix::transpose() const {
  std::vector<Triplet> t;
  t.reserve(nnz());
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      t.push_back({col_idx_[k], r, values_[k]});
    }
  }
  return from_triplets(cols_, rows_, std::move(t));
}

CsrMatrix CsrMatrix::principal_submatrix(const std::vector<std::size_t>& index) const {
  std::unordered_map<std::size_t, std::size_t> local;
  local.reserve(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) local.emplace(index[i], i);
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < index.size(); ++i) {
    const std::size_t r = index[i];
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const auto it = local.find(col_idx_[k]);
      if (it != local.end()) t.push_back({i, it->second, values_[k]});
    }
  }
  return from_triplets(index.size(), index.size(), std::move(t));
}

CsrMatrix subtract(const CsrMatrix& a, const CsrMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::dimension_mismatch, "subtract: shape mismatch");
  }
  std::vector<CsrMatrix::Triplet> t;
  t.reserve(a.nnz() + b.nnz());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t k = a.row_ptr()[r]; k < a.row_ptr()[r + 1]; ++k) {
      t.push_back({r, a.col_idx()[k], a.values()[k]});
    }
    for (std::size_t k = b.row_ptr()[r]; k < b.row_ptr()[r + 1]; ++k) {
      t.push_back({r, b.col_idx()[k], -b.values()[k]});
    }
  }
  return CsrMatrix::from_triplets(a.rows(), a.cols(), std::move(t));
}

}  // namespace gcnfair
