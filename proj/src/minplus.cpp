#include "mpadp/minplus.hpp"

#include <cstdio>
#include <sstream>

#include "mpadp/error.hpp"

namespace mpadp {

namespace {

void check_entry(double v) {
  if (std::isnan(v) || v == -kInf) {
    throw InvalidArgument("min-plus matrix entries must be finite or +inf");
  }
}

std::string format_entry(double v) {
  if (v == kInf) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

MinPlusMatrix::MinPlusMatrix(Eigen::Index rows, Eigen::Index cols, double fill)
    : entries_(Storage::Constant(rows, cols, fill)) {
  check_entry(fill);
}

MinPlusMatrix::MinPlusMatrix(Storage entries) : entries_(std::move(entries)) {
  for (Eigen::Index i = 0; i < entries_.size(); ++i) check_entry(entries_.data()[i]);
}

MinPlusMatrix MinPlusMatrix::identity(Eigen::Index size) {
  MinPlusMatrix I(size, size, kInf);
  for (Eigen::Index i = 0; i < size; ++i) I.entries_(i, i) = 0.0;
  return I;
}

void MinPlusMatrix::set(Eigen::Index i, Eigen::Index j, double value) {
  check_entry(value);
  entries_(i, j) = value;
}

SpanBasis::SpanBasis(MinPlusMatrix matrix) : matrix_(std::move(matrix)) {
  if (matrix_.cols() < 1) throw InvalidArgument("span basis needs at least one column");
  if (matrix_.rows() < 1) throw InvalidArgument("span basis needs at least one row");
  for (Eigen::Index i = 0; i < matrix_.rows(); ++i) {
    bool finite = false;
    for (Eigen::Index j = 0; j < matrix_.cols() && !finite; ++j) finite = matrix_(i, j) != kInf;
    if (!finite) {
      throw ProjectionUndefined("span basis row " + std::to_string(i) +
                                " has no finite entry");
    }
  }
}

MinPlusVector mp_mat_vec(const MinPlusMatrix& A, const MinPlusVector& r) {
  if (A.cols() != r.size()) {
    throw InvalidArgument("mp_mat_vec: matrix has " + std::to_string(A.cols()) +
                          " columns, vector has " + std::to_string(r.size()) + " entries");
  }
  MinPlusVector out(A.rows());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    MinPlus acc = MinPlus::zero();
    for (Eigen::Index j = 0; j < A.cols(); ++j) acc = acc + MinPlus{A(i, j)} * MinPlus{r[j]};
    out[i] = acc.value;
  }
  return out;
}

double mp_dot(const MinPlusVector& x, const MinPlusVector& y) {
  if (x.size() != y.size()) throw InvalidArgument("mp_dot: length mismatch");
  MinPlus acc = MinPlus::zero();
  for (Eigen::Index i = 0; i < x.size(); ++i) acc = acc + MinPlus{x[i]} * MinPlus{y[i]};
  return acc.value;
}

MinPlusMatrix mp_mat_mat(const MinPlusMatrix& A, const MinPlusMatrix& B) {
  if (A.cols() != B.rows()) throw InvalidArgument("mp_mat_mat: inner dimensions differ");
  MinPlusMatrix::Storage C(A.rows(), B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < B.cols(); ++j) {
      MinPlus acc = MinPlus::zero();
      for (Eigen::Index l = 0; l < A.cols(); ++l) acc = acc + MinPlus{A(i, l)} * MinPlus{B(l, j)};
      C(i, j) = acc.value;
    }
  }
  return MinPlusMatrix(std::move(C));
}

MinPlusVector residuate(const MinPlusMatrix& A, const MinPlusVector& u) {
  if (A.rows() != u.size()) {
    throw InvalidArgument("residuate: matrix has " + std::to_string(A.rows()) +
                          " rows, vector has " + std::to_string(u.size()) + " entries");
  }
  if (!u.allFinite()) throw InvalidArgument("residuate: vector to project must be finite");

  MinPlusVector r = MinPlusVector::Constant(A.cols(), -kInf);
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    bool row_finite = false;
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      const double a = A(i, j);
      if (a == kInf) continue;  // u(i) - inf = -inf never raises the max
      row_finite = true;
      r[j] = std::max(r[j], u[i] - a);
    }
    if (!row_finite) {
      throw ProjectionUndefined("residuate: row " + std::to_string(i) +
                                " has no finite entry");
    }
  }
  // An all-infinite column constrains nothing; +inf drops it from A (x) r.
  for (Eigen::Index j = 0; j < r.size(); ++j) {
    if (r[j] == -kInf) r[j] = kInf;
  }
  return r;
}

MinPlusVector project(const SpanBasis& basis, const MinPlusVector& u) {
  return mp_mat_vec(basis.matrix(), residuate(basis.matrix(), u));
}

MinPlusVector variational_weights(const SpanBasis& basis, const MinPlusMatrix& W,
                                  const MinPlusVector& u) {
  if (W.rows() != basis.rows()) {
    throw InvalidArgument("project_variational: test matrix has " + std::to_string(W.rows()) +
                          " rows, basis has " + std::to_string(basis.rows()));
  }
  if (u.size() != basis.rows()) throw InvalidArgument("project_variational: length mismatch");
  if (!u.allFinite()) throw InvalidArgument("project_variational: vector to project must be finite");
  for (Eigen::Index m = 0; m < W.cols(); ++m) {
    bool finite = false;
    for (Eigen::Index i = 0; i < W.rows() && !finite; ++i) finite = W(i, m) != kInf;
    if (!finite) {
      throw InvalidArgument("project_variational: test vector " + std::to_string(m) +
                            " has no finite entry");
    }
  }

  const MinPlusMatrix Wt = W.transpose();
  const MinPlusMatrix A = mp_mat_mat(Wt, basis.matrix());
  const MinPlusVector b = mp_mat_vec(Wt, u);

  MinPlusVector r = MinPlusVector::Constant(A.cols(), -kInf);
  for (Eigen::Index m = 0; m < A.rows(); ++m) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      if (A(m, j) == kInf) continue;
      r[j] = std::max(r[j], b[m] - A(m, j));
    }
  }
  for (Eigen::Index j = 0; j < r.size(); ++j) {
    if (r[j] == -kInf) r[j] = kInf;
  }
  return r;
}

MinPlusVector project_variational(const SpanBasis& basis, const MinPlusMatrix& W,
                                  const MinPlusVector& u) {
  MinPlusVector v = mp_mat_vec(basis.matrix(), variational_weights(basis, W, u));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v[i] == kInf) {
      throw ProjectionUndefined("project_variational: coordinate " + std::to_string(i) +
                                " is not reached by any test vector");
    }
  }
  return v;
}

nlohmann::json minplus_vector_to_json(const MinPlusVector& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v[i] == kInf) {
      arr.push_back("inf");
    } else {
      arr.push_back(v[i]);
    }
  }
  return arr;
}

nlohmann::json minplus_to_json(const MinPlusMatrix& A) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    rows.push_back(minplus_vector_to_json(A.entries().row(i).transpose()));
  }
  return rows;
}

MinPlusMatrix minplus_from_json(const nlohmann::json& doc) {
  if (!doc.is_array() || doc.empty()) throw InvalidArgument("min-plus matrix: expected a non-empty array of rows");
  const std::size_t cols = doc[0].is_array() ? doc[0].size() : 0;
  if (cols == 0) throw InvalidArgument("min-plus matrix: rows must be non-empty arrays");
  MinPlusMatrix::Storage entries(static_cast<Eigen::Index>(doc.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& row = doc[i];
    if (!row.is_array() || row.size() != cols) {
      throw InvalidArgument("min-plus matrix: row " + std::to_string(i) + " must have " +
                            std::to_string(cols) + " entries");
    }
    for (std::size_t j = 0; j < cols; ++j) {
      const auto& cell = row[j];
      double v = 0.0;
      if (cell.is_string() && cell.get<std::string>() == "inf") {
        v = kInf;
      } else if (cell.is_number()) {
        v = cell.get<double>();
      } else {
        throw InvalidArgument("min-plus matrix: entry (" + std::to_string(i) + ", " +
                              std::to_string(j) + ") must be a number or \"inf\"");
      }
      entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  }
  return MinPlusMatrix(std::move(entries));
}

std::string minplus_to_csv(const MinPlusMatrix& A) {
  std::ostringstream out;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      if (j) out << ',';
      out << format_entry(A(i, j));
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace mpadp
