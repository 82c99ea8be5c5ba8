#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <limits>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

namespace mpadp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Element of R_min = R u {+inf} with (+) = min and (x) = +.
// +inf is the additive identity and absorbing for (x); 0 is the
// multiplicative identity.
struct MinPlus {
  double value = kInf;

  constexpr MinPlus() = default;
  constexpr MinPlus(double v) : value(v) {}  // NOLINT(google-explicit-constructor)

  static constexpr MinPlus zero() { return MinPlus{kInf}; }
  static constexpr MinPlus one() { return MinPlus{0.0}; }

  constexpr bool operator==(const MinPlus&) const = default;
  constexpr auto operator<=>(const MinPlus&) const = default;
};

constexpr MinPlus operator+(MinPlus x, MinPlus y) { return MinPlus{std::min(x.value, y.value)}; }
constexpr MinPlus operator*(MinPlus x, MinPlus y) {
  return (x.value == kInf || y.value == kInf) ? MinPlus{kInf} : MinPlus{x.value + y.value};
}

// Dense vector over R_min.
using MinPlusVector = Eigen::VectorXd;

// Dense row-major matrix over R_min. Entries are finite or +inf.
class MinPlusMatrix {
 public:
  using Storage = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  MinPlusMatrix() = default;
  MinPlusMatrix(Eigen::Index rows, Eigen::Index cols, double fill = kInf);
  explicit MinPlusMatrix(Storage entries);

  // 0 on the diagonal, +inf elsewhere.
  static MinPlusMatrix identity(Eigen::Index size);

  Eigen::Index rows() const { return entries_.rows(); }
  Eigen::Index cols() const { return entries_.cols(); }

  double operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }
  void set(Eigen::Index i, Eigen::Index j, double value);

  const Storage& entries() const { return entries_; }
  MinPlusMatrix transpose() const { return MinPlusMatrix(Storage(entries_.transpose())); }

  bool operator==(const MinPlusMatrix& other) const {
    return rows() == other.rows() && cols() == other.cols() && entries_ == other.entries_;
  }

 private:
  Storage entries_;
};

// Feature matrix whose min-plus column span is the approximation class.
// Rows are per-(state, action) features, columns are basis functions.
// Every row must hold a finite entry; otherwise projection is undefined at
// that coordinate.
class SpanBasis {
 public:
  explicit SpanBasis(MinPlusMatrix matrix);

  const MinPlusMatrix& matrix() const { return matrix_; }
  Eigen::Index rows() const { return matrix_.rows(); }
  Eigen::Index cols() const { return matrix_.cols(); }

 private:
  MinPlusMatrix matrix_;
};

// out(i) = min_j (A(i, j) + r(j)).
MinPlusVector mp_mat_vec(const MinPlusMatrix& A, const MinPlusVector& r);

// min_i (x(i) + y(i)).
double mp_dot(const MinPlusVector& x, const MinPlusVector& y);

// C(i, j) = min_l (A(i, l) + B(l, j)).
MinPlusMatrix mp_mat_mat(const MinPlusMatrix& A, const MinPlusMatrix& B);

// Least r with A (x) r >= u:  r(j) = max_i (u(i) - A(i, j)) over the rows
// where A(i, j) is finite, and +inf for an all-infinite column. u must be
// finite and every row of A must hold a finite entry.
MinPlusVector residuate(const MinPlusMatrix& A, const MinPlusVector& u);

// Least element of span(basis) majorizing u.
MinPlusVector project(const SpanBasis& basis, const MinPlusVector& u);

// Weights of the least v = basis (x) r with W^T (x) v >= W^T (x) u.
MinPlusVector variational_weights(const SpanBasis& basis, const MinPlusMatrix& W,
                                  const MinPlusVector& u);

// basis (x) variational_weights(basis, W, u). Throws ProjectionUndefined
// when the result has an infinite coordinate.
MinPlusVector project_variational(const SpanBasis& basis, const MinPlusMatrix& W,
                                  const MinPlusVector& u);

// JSON: array of rows; +inf is written as the string "inf".
nlohmann::json minplus_to_json(const MinPlusMatrix& A);
MinPlusMatrix minplus_from_json(const nlohmann::json& doc);
nlohmann::json minplus_vector_to_json(const MinPlusVector& v);

// One row per line, comma separated, "inf" for +inf.
std::string minplus_to_csv(const MinPlusMatrix& A);

}  // namespace mpadp
