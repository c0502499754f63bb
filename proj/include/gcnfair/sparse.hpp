#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace gcnfair {

// Row-major compressed sparse matrix. Column indices are sorted within each
// row, so every product below accumulates in a fixed order.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  CsrMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
            std::vector<std::size_t> col_idx, std::vector<double> values);

  struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
  };
  // Duplicate coordinates are summed.
  static CsrMatrix from_triplets(std::size_t rows, std::size_t cols,
                                 std::vector<Triplet> triplets);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nnz() const noexcept { return values_.size(); }

  const std::vector<std::size_t>& row_ptr() const noexcept { return row_ptr_; }
  const std::vector<std::size_t>& col_idx() const noexcept { return col_idx_; }
  const std::vector<double>& values() const noexcept { return values_; }

  double coeff(std::size_t r, std::size_t c) const;

  // this * x
  Eigen::MatrixXd multiply(const Eigen::MatrixXd& x) const;
  Eigen::VectorXd multiply(const Eigen::VectorXd& x) const;
  // this^T * x
  Eigen::MatrixXd multiply_transpose(const Eigen::MatrixXd& x) const;
  Eigen::VectorXd multiply_transpose(const Eigen::VectorXd& x) const;

  Eigen::MatrixXd to_dense() const;
  CsrMatrix transpose() const;
  // Principal submatrix on `index` (in the given order).
  CsrMatrix principal_submatrix(const std::vector<std::size_t>& index) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_idx_;
  std::vector<double> values_;
};

// Element-wise a - b (same shape).
CsrMatrix subtract(const CsrMatrix& a, const CsrMatrix& b);

}  // namespace gcnfair
