#include "altproj/numerics.hpp"

#include "altproj/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace altproj {

namespace {

constexpr double kAsymmetryTol = 1e-12;

// Index of the entry with largest magnitude; strict comparison keeps the
// lowest index on ties.
Eigen::Index dominant_index(const Eigen::Ref<const Vector>& v) {
  Eigen::Index best = 0;
  double best_abs = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v(i));
    if (a > best_abs) {
      best_abs = a;
      best = i;
    }
  }
  return best;
}

}  // namespace

bool all_finite(const Matrix& m) noexcept {
  return m.allFinite();
}

void require_finite(const Matrix& m, const char* what) {
  if (m.rows() < 1 || m.cols() < 1) {
    fail(ErrorCode::invalid_input, std::string(what) + ": empty matrix");
  }
  if (!m.allFinite()) {
    fail(ErrorCode::invalid_input, std::string(what) + ": non-finite entry");
  }
}

SvdResult svd(const Matrix& m) {
  require_finite(m, "svd");
  Eigen::JacobiSVD<Matrix> solver(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdResult out{solver.matrixU(), solver.singularValues(), solver.matrixV()};
  for (Eigen::Index j = 0; j < out.u.cols(); ++j) {
    const Eigen::Index i = dominant_index(out.u.col(j));
    if (out.u(i, j) < 0.0) {
      out.u.col(j) *= -1.0;
      out.v.col(j) *= -1.0;
    }
  }
  return out;
}

SymEigResult sym_eig_desc(const Matrix& m) {
  require_finite(m, "sym_eig_desc");
  if (m.rows() != m.cols()) {
    fail(ErrorCode::invalid_input, "sym_eig_desc: matrix is not square");
  }
  if (relative_asymmetry(m) > kAsymmetryTol) {
    fail(ErrorCode::invalid_input, "sym_eig_desc: matrix is not symmetric");
  }
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    fail(ErrorCode::numerical_failure, "sym_eig_desc: eigensolver did not converge");
  }
  const Eigen::Index n = sym.rows();
  SymEigResult out{Vector(n), Matrix(n, n)};
  // Eigen returns ascending order.
  for (Eigen::Index j = 0; j < n; ++j) {
    out.eigvals(j) = solver.eigenvalues()(n - 1 - j);
    out.eigvecs.col(j) = solver.eigenvectors().col(n - 1 - j);
    const Eigen::Index i = dominant_index(out.eigvecs.col(j));
    if (out.eigvecs(i, j) < 0.0) out.eigvecs.col(j) *= -1.0;
  }
  return out;
}

double fro_norm(const Matrix& m) {
  if (!m.allFinite()) fail(ErrorCode::invalid_input, "fro_norm: non-finite entry");
  return m.norm();
}

double relative_asymmetry(const Matrix& m) {
  if (m.rows() != m.cols()) {
    fail(ErrorCode::invalid_input, "relative_asymmetry: matrix is not square");
  }
  return (m - m.transpose()).norm() / std::max(m.norm(), 1.0);
}

double sigma_min(const Matrix& m) {
  require_finite(m, "sigma_min");
  Eigen::JacobiSVD<Matrix> solver(m);
  const Vector& s = solver.singularValues();
  return s.size() == 0 ? 0.0 : s(s.size() - 1);
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

}  // namespace altproj
