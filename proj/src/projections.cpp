#include "altproj/projections.hpp"

#include "altproj/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

namespace altproj {

namespace {

constexpr double kSymmetryTol = 1e-12;

void require_shape(const Matrix& m, Shape expected, const char* what) {
  if (shape_of(m) != expected) {
    fail(ErrorCode::invalid_input,
         std::string(what) + ": expected " + std::to_string(expected.rows) + "x" +
             std::to_string(expected.cols) + ", got " + std::to_string(m.rows()) + "x" +
             std::to_string(m.cols()));
  }
}

void require_symmetric(const Matrix& z, const char* what) {
  if (z.rows() != z.cols()) fail(ErrorCode::invalid_input, std::string(what) + ": not square");
  if (relative_asymmetry(z) > kSymmetryTol) {
    fail(ErrorCode::invalid_input, std::string(what) + ": not symmetric");
  }
}

bool is_symmetric_within(const Matrix& z, double tol) {
  return z.rows() == z.cols() && relative_asymmetry(z) <= tol;
}

// Orthonormal basis of span(basis) via column-pivoted QR.
Matrix orthonormal_basis(const Matrix& basis) {
  require_finite(basis, "affine basis");
  if (basis.cols() > basis.rows()) {
    fail(ErrorCode::invalid_input, "affine basis: more columns than rows");
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(basis);
  qr.setThreshold(1e-10);
  if (qr.rank() < basis.cols()) {
    fail(ErrorCode::invalid_input, "affine basis: columns are linearly dependent");
  }
  return qr.householderQ() * Matrix::Identity(basis.rows(), basis.cols());
}

Matrix project_onto_span(const Matrix& z, const Matrix& q, const Matrix& point) {
  const Eigen::Map<const Vector> zv(z.data(), z.size());
  const Eigen::Map<const Vector> pv(point.data(), point.size());
  const Vector diff = zv - pv;
  const Vector out = pv + q * (q.transpose() * diff);
  return Eigen::Map<const Matrix>(out.data(), z.rows(), z.cols());
}

}  // namespace

// ---------------------------------------------------------------------------

ColumnNormTargets::ColumnNormTargets(std::vector<double> c) : c_(std::move(c)) {
  if (c_.empty()) fail(ErrorCode::invalid_input, "column norm targets: empty");
  for (double v : c_) {
    if (!std::isfinite(v) || v <= 0.0) {
      fail(ErrorCode::invalid_input, "column norm targets: entries must be positive");
    }
  }
}

ColumnNormTargets ColumnNormTargets::ones(std::size_t count) {
  return ColumnNormTargets(std::vector<double>(count, 1.0));
}

double ColumnNormTargets::min() const { return *std::min_element(c_.begin(), c_.end()); }
double ColumnNormTargets::max() const { return *std::max_element(c_.begin(), c_.end()); }
double ColumnNormTargets::sum() const { return std::accumulate(c_.begin(), c_.end(), 0.0); }

Projector::Projector(std::string name, Shape shape, ProjectFn project, ContainsFn contains)
    : name_(std::move(name)),
      shape_(shape),
      project_(std::move(project)),
      contains_(std::move(contains)) {
  if (shape_.rows < 1 || shape_.cols < 1) {
    fail(ErrorCode::invalid_input, "projector " + name_ + ": empty ambient shape");
  }
}

Matrix Projector::project(const Matrix& z) const {
  require_shape(z, shape_, name_.c_str());
  require_finite(z, name_.c_str());
  return project_(z);
}

bool Projector::contains(const Matrix& z, double tol) const {
  if (shape_of(z) != shape_ || !z.allFinite()) return false;
  return contains_(z, tol);
}

// ---------------------------------------------------------------------------

Matrix project_box(const Matrix& z, const Matrix& lower, const Matrix& upper) {
  require_finite(z, "project_box");
  require_shape(lower, shape_of(z), "project_box lower");
  require_shape(upper, shape_of(z), "project_box upper");
  if ((lower.array() > upper.array()).any()) {
    fail(ErrorCode::invalid_input, "project_box: lower bound exceeds upper bound");
  }
  return z.cwiseMax(lower).cwiseMin(upper);
}

Matrix project_halfspace(const Matrix& z, const Matrix& normal, double offset) {
  require_finite(z, "project_halfspace");
  require_shape(normal, shape_of(z), "project_halfspace normal");
  const double nn = normal.squaredNorm();
  if (!(nn > 0.0) || !std::isfinite(offset)) {
    fail(ErrorCode::invalid_input, "project_halfspace: zero normal or non-finite offset");
  }
  const double excess = normal.cwiseProduct(z).sum() - offset;
  if (excess <= 0.0) return z;
  return z - (excess / nn) * normal;
}

Matrix project_affine(const Matrix& z, const Matrix& basis, const Matrix& point) {
  require_finite(z, "project_affine");
  require_shape(point, shape_of(z), "project_affine point");
  if (basis.rows() != z.size()) {
    fail(ErrorCode::invalid_input, "project_affine: basis rows must equal the point dimension");
  }
  return project_onto_span(z, orthonormal_basis(basis), point);
}

Matrix project_column_norms(const Matrix& z, const ColumnNormTargets& targets) {
  require_finite(z, "project_column_norms");
  if (static_cast<std::size_t>(z.cols()) != targets.size()) {
    fail(ErrorCode::invalid_input, "project_column_norms: target count differs from column count");
  }
  Matrix out(z.rows(), z.cols());
  for (Eigen::Index l = 0; l < z.cols(); ++l) {
    const double scale = std::sqrt(targets[static_cast<std::size_t>(l)]);
    const double norm = z.col(l).norm();
    if (norm > 0.0) {
      out.col(l) = (scale / norm) * z.col(l);
    } else {
      out.col(l).setZero();
      out(0, l) = scale;
    }
  }
  return out;
}

Matrix project_tight_frame(const Matrix& z, double a) {
  require_finite(z, "project_tight_frame");
  if (z.rows() > z.cols()) {
    fail(ErrorCode::invalid_input, "project_tight_frame: more rows than columns");
  }
  if (!(a > 0.0) || !std::isfinite(a)) {
    fail(ErrorCode::invalid_input, "project_tight_frame: tightness must be positive");
  }
  const SvdResult d = svd(z);
  return std::sqrt(a) * d.u * d.v.transpose();
}

GramProjection project_gram_tight(const Matrix& z, Eigen::Index n, double a) {
  require_finite(z, "project_gram_tight");
  require_symmetric(z, "project_gram_tight");
  if (n < 1 || n > z.rows()) fail(ErrorCode::invalid_input, "project_gram_tight: n out of range");
  if (!(a > 0.0) || !std::isfinite(a)) {
    fail(ErrorCode::invalid_input, "project_gram_tight: tightness must be positive");
  }
  const SymEigResult eig = sym_eig_desc(z);
  const auto top = eig.eigvecs.leftCols(n);
  Matrix g = a * top * top.transpose();
  g = 0.5 * (g + g.transpose()).eval();
  const bool tie = n < z.rows() && eig.eigvals(n - 1) == eig.eigvals(n);
  return {std::move(g), tie};
}

Matrix project_gram_coherence(const Matrix& z, double xi) {
  require_finite(z, "project_gram_coherence");
  require_symmetric(z, "project_gram_coherence");
  if (!(xi >= 0.0 && xi < 1.0)) {
    fail(ErrorCode::invalid_input, "project_gram_coherence: xi must lie in [0, 1)");
  }
  const Eigen::Index size = z.rows();
  Matrix out(size, size);
  for (Eigen::Index j = 0; j < size; ++j) {
    out(j, j) = 1.0;
    for (Eigen::Index i = j + 1; i < size; ++i) {
      const double s = 0.5 * (z(i, j) + z(j, i));
      const double clipped = std::clamp(s, -xi, xi);
      out(i, j) = clipped;
      out(j, i) = clipped;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

Projector box_set(Matrix lower, Matrix upper) {
  require_finite(lower, "box lower");
  require_shape(upper, shape_of(lower), "box upper");
  require_finite(upper, "box upper");
  if ((lower.array() > upper.array()).any()) {
    fail(ErrorCode::invalid_input, "box: lower bound exceeds upper bound");
  }
  const Shape shape = shape_of(lower);
  auto project = [lower, upper](const Matrix& z) { return project_box(z, lower, upper); };
  auto contains = [lower, upper](const Matrix& z, double tol) {
    return (z.array() >= lower.array() - tol).all() && (z.array() <= upper.array() + tol).all();
  };
  return Projector("box", shape, project, contains);
}

Projector oriented_box_set(Matrix rotation, Vector lower, Vector upper) {
  require_finite(rotation, "oriented box rotation");
  const Eigen::Index n = rotation.rows();
  if (rotation.cols() != n || lower.size() != n || upper.size() != n) {
    fail(ErrorCode::invalid_input, "oriented box: inconsistent dimensions");
  }
  if ((rotation.transpose() * rotation - Matrix::Identity(n, n)).norm() > 1e-10) {
    fail(ErrorCode::invalid_input, "oriented box: rotation is not orthogonal");
  }
  if ((lower.array() > upper.array()).any()) {
    fail(ErrorCode::invalid_input, "oriented box: lower bound exceeds upper bound");
  }
  auto project = [rotation, lower, upper](const Matrix& z) -> Matrix {
    const Vector u = rotation.transpose() * z;
    return rotation * u.cwiseMax(lower).cwiseMin(upper);
  };
  auto contains = [rotation, lower, upper](const Matrix& z, double tol) {
    const Vector u = rotation.transpose() * z;
    return (u.array() >= lower.array() - tol).all() && (u.array() <= upper.array() + tol).all();
  };
  return Projector("oriented-box", Shape{n, 1}, project, contains);
}

Projector halfspace_set(Matrix normal, double offset) {
  require_finite(normal, "halfspace normal");
  if (!(normal.squaredNorm() > 0.0) || !std::isfinite(offset)) {
    fail(ErrorCode::invalid_input, "halfspace: zero normal or non-finite offset");
  }
  const Shape shape = shape_of(normal);
  const double norm = normal.norm();
  auto project = [normal, offset](const Matrix& z) { return project_halfspace(z, normal, offset); };
  auto contains = [normal, offset, norm](const Matrix& z, double tol) {
    return (normal.cwiseProduct(z).sum() - offset) / norm <= tol;
  };
  return Projector("halfspace", shape, project, contains);
}

Projector affine_set(Matrix basis, Matrix point) {
  require_finite(point, "affine point");
  if (basis.rows() != point.size()) {
    fail(ErrorCode::invalid_input, "affine: basis rows must equal the point dimension");
  }
  Matrix q = orthonormal_basis(basis);
  const Shape shape = shape_of(point);
  auto project = [q, point](const Matrix& z) { return project_onto_span(z, q, point); };
  auto contains = [q, point](const Matrix& z, double tol) {
    return (z - project_onto_span(z, q, point)).norm() <= tol * (1.0 + z.norm());
  };
  return Projector("affine", shape, project, contains);
}

Projector line_set(double angle) {
  Matrix direction(2, 1);
  direction << std::cos(angle), std::sin(angle);
  Projector p = affine_set(direction, Matrix::Zero(2, 1));
  return Projector("line", p.shape(), [p](const Matrix& z) { return p.project(z); },
                   [p](const Matrix& z, double tol) { return p.contains(z, tol); });
}

Projector column_norm_set(Eigen::Index rows, ColumnNormTargets targets) {
  if (rows < 1) fail(ErrorCode::invalid_input, "column norm set: rows must be positive");
  const Shape shape{rows, static_cast<Eigen::Index>(targets.size())};
  auto project = [targets](const Matrix& z) { return project_column_norms(z, targets); };
  auto contains = [targets](const Matrix& z, double tol) {
    for (Eigen::Index l = 0; l < z.cols(); ++l) {
      const double c = targets[static_cast<std::size_t>(l)];
      if (std::abs(z.col(l).squaredNorm() - c) > tol * std::max(1.0, c)) return false;
    }
    return true;
  };
  return Projector("column-norms", shape, project, contains);
}

Projector tight_frame_set(Eigen::Index rows, Eigen::Index cols, double a) {
  if (rows < 1 || rows > cols) {
    fail(ErrorCode::invalid_input, "tight frame set: need 1 <= rows <= cols");
  }
  if (!(a > 0.0) || !std::isfinite(a)) {
    fail(ErrorCode::invalid_input, "tight frame set: tightness must be positive");
  }
  auto project = [a](const Matrix& z) { return project_tight_frame(z, a); };
  auto contains = [a, rows](const Matrix& z, double tol) {
    const Matrix residual = z * z.transpose() - a * Matrix::Identity(rows, rows);
    return residual.norm() <= tol * a * std::sqrt(static_cast<double>(rows));
  };
  return Projector("tight-frame", Shape{rows, cols}, project, contains);
}

Projector gram_tight_set(Eigen::Index size, Eigen::Index n, double a) {
  if (n < 1 || n > size) fail(ErrorCode::invalid_input, "gram tight set: need 1 <= n <= size");
  if (!(a > 0.0) || !std::isfinite(a)) {
    fail(ErrorCode::invalid_input, "gram tight set: tightness must be positive");
  }
  auto project = [n, a](const Matrix& z) { return project_gram_tight(z, n, a).gram; };
  auto contains = [n, a](const Matrix& z, double tol) {
    if (!is_symmetric_within(z, tol)) return false;
    const Vector lambda = sym_eig_desc(0.5 * (z + z.transpose())).eigvals;
    const double slack = tol * std::max(1.0, a);
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
      const double target = i < n ? a : 0.0;
      if (std::abs(lambda(i) - target) > slack) return false;
    }
    return true;
  };
  return Projector("gram-tight", Shape{size, size}, project, contains);
}

Projector gram_coherence_set(Eigen::Index size, double xi) {
  if (size < 1) fail(ErrorCode::invalid_input, "gram coherence set: size must be positive");
  if (!(xi >= 0.0 && xi < 1.0)) {
    fail(ErrorCode::invalid_input, "gram coherence set: xi must lie in [0, 1)");
  }
  auto project = [xi](const Matrix& z) { return project_gram_coherence(z, xi); };
  auto contains = [xi](const Matrix& z, double tol) {
    if (!is_symmetric_within(z, tol)) return false;
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
      if (std::abs(z(j, j) - 1.0) > tol) return false;
      for (Eigen::Index i = 0; i < z.rows(); ++i) {
        if (i != j && std::abs(z(i, j)) > xi + tol) return false;
      }
    }
    return true;
  };
  return Projector("gram-coherence", Shape{size, size}, project, contains);
}

}  // namespace altproj
