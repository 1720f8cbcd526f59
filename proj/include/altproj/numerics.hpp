#pragma once

// Dense kernels shared by every projector. Decompositions are returned with
// nonincreasing spectra and a fixed sign convention so that projector outputs
// are reproducible bit for bit on one platform.

#include <Eigen/Dense>

#include <string>

namespace altproj {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct SvdResult {
  Matrix u;        // rows x min(rows, cols), orthonormal columns
  Vector singulars;  // nonincreasing, nonnegative
  Matrix v;        // cols x min(rows, cols), orthonormal columns
};

struct SymEigResult {
  Vector eigvals;  // nonincreasing
  Matrix eigvecs;  // orthonormal columns, eigvecs.col(i) pairs with eigvals(i)
};

bool all_finite(const Matrix& m) noexcept;

/// Throws invalid-input unless m is non-empty and every entry is finite.
void require_finite(const Matrix& m, const char* what);

/// Thin SVD. Each left singular vector is flipped so that its entry of largest
/// magnitude (lowest index on ties) is nonnegative; v follows u.
SvdResult svd(const Matrix& m);

/// Full eigendecomposition of a symmetric matrix, eigenvalues nonincreasing.
/// The input is symmetrized as (m + m^T)/2 after the asymmetry check.
SymEigResult sym_eig_desc(const Matrix& m);

double fro_norm(const Matrix& m);

/// Relative asymmetry ||m - m^T||_F / max(||m||_F, 1). Requires a square m.
double relative_asymmetry(const Matrix& m);

/// Smallest singular value (0 for an empty spectrum).
double sigma_min(const Matrix& m);

/// Shortest-round-trip decimal text for a double ("nan", "inf", "-inf" for
/// non-finite values).
std::string format_double(double value);

}  // namespace altproj
