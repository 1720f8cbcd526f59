#pragma once

#include "altproj/numerics.hpp"

#include <functional>
#include <string>
#include <vector>

namespace altproj {

struct Shape {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  friend bool operator==(const Shape&, const Shape&) = default;
};

inline Shape shape_of(const Matrix& m) { return {m.rows(), m.cols()}; }

/// Squared column-norm targets c_1..c_L, all strictly positive.
class ColumnNormTargets {
 public:
  explicit ColumnNormTargets(std::vector<double> c);
  static ColumnNormTargets ones(std::size_t count);

  std::size_t size() const noexcept { return c_.size(); }
  double operator[](std::size_t i) const { return c_[i]; }
  const std::vector<double>& values() const noexcept { return c_; }
  double min() const;
  double max() const;
  double sum() const;

 private:
  std::vector<double> c_;
};

/// A named, stateless nearest-point map onto a closed set, with a membership
/// test. Copies share the underlying callables; all state is immutable.
class Projector {
 public:
  using ProjectFn = std::function<Matrix(const Matrix&)>;
  using ContainsFn = std::function<bool(const Matrix&, double)>;

  Projector(std::string name, Shape shape, ProjectFn project, ContainsFn contains);

  const std::string& name() const noexcept { return name_; }
  Shape shape() const noexcept { return shape_; }

  /// Checks the shape and finiteness of z before projecting.
  Matrix project(const Matrix& z) const;
  bool contains(const Matrix& z, double tol) const;

 private:
  std::string name_;
  Shape shape_;
  ProjectFn project_;
  ContainsFn contains_;
};

// ---------------------------------------------------------------------------
// Closed-form projections.

Matrix project_box(const Matrix& z, const Matrix& lower, const Matrix& upper);

/// Nearest point of {w : <normal, w> <= offset} (Frobenius inner product).
Matrix project_halfspace(const Matrix& z, const Matrix& normal, double offset);

/// Nearest point of point + span(basis), acting on vec(z). `basis` has
/// z.size() rows and linearly independent columns; `point` has z's shape.
Matrix project_affine(const Matrix& z, const Matrix& basis, const Matrix& point);

/// Rescales column l to Euclidean norm sqrt(c_l). A zero column becomes
/// sqrt(c_l) * e_1.
Matrix project_column_norms(const Matrix& z, const ColumnNormTargets& targets);

/// sqrt(a) * U V^T from the thin SVD of z (rows <= cols).
Matrix project_tight_frame(const Matrix& z, double a);

struct GramProjection {
  Matrix gram;
  /// True when lambda_n == lambda_{n+1} exactly, i.e. the nearest point is
  /// not unique and the returned one was picked by the decomposition.
  bool non_unique = false;
};

/// a * [U]_n [U]_n^T from the descending eigendecomposition of symmetric z.
GramProjection project_gram_tight(const Matrix& z, Eigen::Index n, double a);

/// Unit diagonal, off-diagonal entries clipped to [-xi, xi].
Matrix project_gram_coherence(const Matrix& z, double xi);

// ---------------------------------------------------------------------------
// Projector factories. Vector-valued sets use column shapes (n x 1).

Projector box_set(Matrix lower, Matrix upper);

/// Box expressed in the orthonormal frame `rotation`:
/// { rotation * u : lower <= u <= upper } in R^n.
Projector oriented_box_set(Matrix rotation, Vector lower, Vector upper);

Projector halfspace_set(Matrix normal, double offset);
Projector affine_set(Matrix basis, Matrix point);

/// Line through the origin of R^2 at the given angle (radians) to the first axis.
Projector line_set(double angle);

Projector column_norm_set(Eigen::Index rows, ColumnNormTargets targets);
Projector tight_frame_set(Eigen::Index rows, Eigen::Index cols, double a);
Projector gram_tight_set(Eigen::Index size, Eigen::Index n, double a);
Projector gram_coherence_set(Eigen::Index size, double xi);

}  // namespace altproj
