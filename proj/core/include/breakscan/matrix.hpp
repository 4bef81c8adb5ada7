#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace breakscan {

// Small dense matrix, row-major. Dimensions in this library stay tiny
// (regressor counts p <= 10, design widths p+1), so everything is done
// with straightforward dense factorizations.
class Mat {
 public:
  Mat() = default;
  Mat(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, 0.0) {}
  Mat(int rows, int cols, std::vector<double> entries);
  Mat(std::initializer_list<std::initializer_list<double>> rows);

  static Mat identity(int n);
  static Mat col_vector(const std::vector<double>& v);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double& operator()(int i, int j) { return data_[static_cast<size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return data_[static_cast<size_t>(i) * cols_ + j]; }

  const std::vector<double>& entries() const { return data_; }
  std::vector<double>& entries() { return data_; }

  std::vector<double> col(int j) const;
  std::vector<double> row(int i) const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

Mat multiply(const Mat& a, const Mat& b);
Mat transpose(const Mat& a);
Mat add(const Mat& a, const Mat& b);
Mat subtract(const Mat& a, const Mat& b);
Mat scale(const Mat& a, double s);

// Max absolute entry difference; DimensionMismatch if shapes differ.
double max_abs_diff(const Mat& a, const Mat& b);
double inf_norm(const Mat& a);

// Solves a x = b for square a. Throws SingularMatrix when the condition
// estimate exceeds 1e12, DimensionMismatch on shape violations.
Mat solve(const Mat& a, const Mat& b);
std::vector<double> solve(const Mat& a, const std::vector<double>& b);

// Dense inverse with the same singularity policy as solve().
Mat inverse(const Mat& a);

// Infinity-norm condition number estimate; +infinity for singular or
// non-finite input.
double condition_estimate(const Mat& a);

// Inverse of [a11 a12; a21 a22] assembled from the block formula:
// the (2,2) block is S^-1 with S = a22 - a21 a11^-1 a12, and the (1,1)
// block is a11^-1 + a11^-1 a12 S^-1 a21 a11^-1, which only requires a11
// and S to be invertible. Throws SingularBlock / DimensionMismatch.
Mat partitioned_inverse(const Mat& a11, const Mat& a12, const Mat& a21, const Mat& a22);

// Assembles the 2x2 block matrix [a11 a12; a21 a22].
Mat assemble_blocks(const Mat& a11, const Mat& a12, const Mat& a21, const Mat& a22);

// Shared singularity threshold for all statistics.
inline constexpr double kConditionLimit = 1e12;

}  // namespace breakscan
