#include "breakscan/matrix.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "breakscan/errors.hpp"

namespace breakscan {

namespace {

using EigenRowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const EigenRowMat>;
using MutMap = Eigen::Map<EigenRowMat>;

ConstMap as_eigen(const Mat& m) { return ConstMap(m.entries().data(), m.rows(), m.cols()); }

bool all_finite(const Mat& m) {
  for (double x : m.entries()) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

void require_square(const Mat& a, const char* who) {
  if (a.rows() != a.cols()) {
    throw DimensionMismatch(std::string(who) + ": matrix is " + std::to_string(a.rows()) + "x" +
                            std::to_string(a.cols()) + ", expected square");
  }
}

}  // namespace

Mat::Mat(int rows, int cols, std::vector<double> entries) : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != static_cast<size_t>(rows) * cols) {
    throw DimensionMismatch("Mat: entries length does not equal rows*cols");
  }
}

Mat::Mat(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = static_cast<int>(rows.size());
  cols_ = rows_ > 0 ? static_cast<int>(rows.begin()->size()) : 0;
  data_.reserve(static_cast<size_t>(rows_) * cols_);
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != cols_) {
      throw DimensionMismatch("Mat: ragged initializer");
    }
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Mat Mat::identity(int n) {
  Mat m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Mat Mat::col_vector(const std::vector<double>& v) {
  Mat m(static_cast<int>(v.size()), 1);
  m.entries() = v;
  return m;
}

std::vector<double> Mat::col(int j) const {
  std::vector<double> out(rows_);
  for (int i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
  return out;
}

std::vector<double> Mat::row(int i) const {
  std::vector<double> out(cols_);
  for (int j = 0; j < cols_; ++j) out[j] = (*this)(i, j);
  return out;
}

Mat multiply(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows()) throw DimensionMismatch("multiply: inner dimensions differ");
  Mat out(a.rows(), b.cols());
  MutMap(out.entries().data(), out.rows(), out.cols()) = as_eigen(a) * as_eigen(b);
  return out;
}

Mat transpose(const Mat& a) {
  Mat out(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

Mat add(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionMismatch("add: shapes differ");
  Mat out = a;
  for (size_t i = 0; i < out.entries().size(); ++i) out.entries()[i] += b.entries()[i];
  return out;
}

Mat subtract(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionMismatch("subtract: shapes differ");
  Mat out = a;
  for (size_t i = 0; i < out.entries().size(); ++i) out.entries()[i] -= b.entries()[i];
  return out;
}

Mat scale(const Mat& a, double s) {
  Mat out = a;
  for (double& x : out.entries()) x *= s;
  return out;
}

double max_abs_diff(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionMismatch("max_abs_diff: shapes differ");
  double m = 0.0;
  for (size_t i = 0; i < a.entries().size(); ++i) {
    m = std::max(m, std::abs(a.entries()[i] - b.entries()[i]));
  }
  return m;
}

double inf_norm(const Mat& a) {
  double m = 0.0;
  for (int i = 0; i < a.rows(); ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < a.cols(); ++j) row_sum += std::abs(a(i, j));
    m = std::max(m, row_sum);
  }
  return m;
}

double condition_estimate(const Mat& a) {
  require_square(a, "condition_estimate");
  if (a.rows() == 0) return 1.0;
  if (!all_finite(a)) return std::numeric_limits<double>::infinity();
  Eigen::PartialPivLU<EigenRowMat> lu(as_eigen(a));
  EigenRowMat inv = lu.inverse();
  if (!inv.allFinite()) return std::numeric_limits<double>::infinity();
  double norm_a = as_eigen(a).cwiseAbs().rowwise().sum().maxCoeff();
  double norm_inv = inv.cwiseAbs().rowwise().sum().maxCoeff();
  if (norm_a == 0.0) return std::numeric_limits<double>::infinity();
  return norm_a * norm_inv;
}

Mat solve(const Mat& a, const Mat& b) {
  require_square(a, "solve");
  if (a.rows() != b.rows()) throw DimensionMismatch("solve: rhs row count differs");
  double cond = condition_estimate(a);
  if (!(cond <= kConditionLimit)) {
    throw SingularMatrix("solve: condition estimate " + std::to_string(cond) + " exceeds 1e12");
  }
  Mat x(b.rows(), b.cols());
  Eigen::PartialPivLU<EigenRowMat> lu(as_eigen(a));
  MutMap(x.entries().data(), x.rows(), x.cols()) = lu.solve(as_eigen(b));
  return x;
}

std::vector<double> solve(const Mat& a, const std::vector<double>& b) {
  return solve(a, Mat::col_vector(b)).entries();
}

Mat inverse(const Mat& a) { return solve(a, Mat::identity(a.rows())); }

Mat assemble_blocks(const Mat& a11, const Mat& a12, const Mat& a21, const Mat& a22) {
  if (a11.rows() != a12.rows() || a21.rows() != a22.rows() || a11.cols() != a21.cols() ||
      a12.cols() != a22.cols()) {
    throw DimensionMismatch("assemble_blocks: blocks not conformable");
  }
  const int n1 = a11.rows(), n2 = a21.rows(), m1 = a11.cols(), m2 = a12.cols();
  Mat out(n1 + n2, m1 + m2);
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < m1; ++j) out(i, j) = a11(i, j);
    for (int j = 0; j < m2; ++j) out(i, m1 + j) = a12(i, j);
  }
  for (int i = 0; i < n2; ++i) {
    for (int j = 0; j < m1; ++j) out(n1 + i, j) = a21(i, j);
    for (int j = 0; j < m2; ++j) out(n1 + i, m1 + j) = a22(i, j);
  }
  return out;
}

Mat partitioned_inverse(const Mat& a11, const Mat& a12, const Mat& a21, const Mat& a22) {
  require_square(a11, "partitioned_inverse(a11)");
  require_square(a22, "partitioned_inverse(a22)");
  const int n1 = a11.rows(), n2 = a22.rows();
  if (a12.rows() != n1 || a12.cols() != n2 || a21.rows() != n2 || a21.cols() != n1) {
    throw DimensionMismatch("partitioned_inverse: off-diagonal blocks not conformable");
  }

  Mat a11_inv;
  try {
    a11_inv = inverse(a11);
  } catch (const SingularMatrix& e) {
    throw SingularBlock(std::string("partitioned_inverse: a11 singular: ") + e.what());
  }

  // S = a22 - a21 a11^-1 a12
  Mat s = n1 > 0 ? subtract(a22, multiply(a21, multiply(a11_inv, a12))) : a22;
  Mat s_inv;
  try {
    s_inv = inverse(s);
  } catch (const SingularMatrix& e) {
    throw SingularBlock(std::string("partitioned_inverse: Schur complement singular: ") + e.what());
  }

  Mat a11_inv_a12 = multiply(a11_inv, a12);
  Mat a21_a11_inv = multiply(a21, a11_inv);

  Mat top_left = add(a11_inv, multiply(a11_inv_a12, multiply(s_inv, a21_a11_inv)));
  Mat top_right = scale(multiply(a11_inv_a12, s_inv), -1.0);
  Mat bottom_left = scale(multiply(s_inv, a21_a11_inv), -1.0);

  return assemble_blocks(top_left, top_right, bottom_left, s_inv);
}

}  // namespace breakscan
