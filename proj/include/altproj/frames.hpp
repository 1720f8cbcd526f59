#pragma once

// Structured tight-frame design by alternating projections: tight frames with
// prescribed column norms, and equiangular tight frames through their Gram
// matrices.

#include "altproj/engine.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace altproj {

/// sqrt((l - n) / (n (l - 1))), the lower bound on the mutual coherence of
/// any n x l frame. Requires 1 <= n <= l and l >= 2.
double welch_bound(Eigen::Index n, Eigen::Index l);

/// Real ETF known to exist for (n, l): orthonormal bases (l = n), simplices
/// (l = n + 1), and a short table of conference-matrix and Steiner
/// constructions together with their Naimark complements.
bool etf_known_to_exist(Eigen::Index n, Eigen::Index l);

/// l > n (n + 1) / 2: no real ETF can exist.
bool exceeds_gerzon_bound(Eigen::Index n, Eigen::Index l);

/// Largest |<d_i, d_j>| / (||d_i|| ||d_j||) over distinct columns.
double mutual_coherence(const Matrix& d);

/// The only tightness compatible with the column targets: sum(c) / n.
double tight_parameter(const ColumnNormTargets& c, Eigen::Index n);

/// ||d d^T - a I||_F.
double tightness_residual(const Matrix& d, double a);

/// D = sqrt(a) [U]_n^T from the top-n eigenvectors of g. Throws
/// rank-deficient when lambda_n <= 1e-12.
Matrix extract_frame_from_gram(const Matrix& g, Eigen::Index n, double a);

/// lambda_n(h) - lambda_{n+1}(h). Requires 1 <= n < size.
double eigen_gap(const Matrix& h, Eigen::Index n);

struct EtfInitCheck {
  double nu = 0.0;                      // l^2 / (2 n^2) - ||g0 - h0||_F^2
  bool certified = false;               // nu > 0
  std::optional<double> gap_threshold;  // nu / a, guaranteed eigen gap of every later H
};

EtfInitCheck check_etf_initialization(const Matrix& g0, const Matrix& h0, Eigen::Index n,
                                      Eigen::Index l);

struct FrameDesignConfig {
  Eigen::Index n = 0;
  Eigen::Index l = 0;
  /// Squared column norms; all ones when absent. Used by the prescribed-norm
  /// pipeline only.
  std::optional<ColumnNormTargets> c;
  std::uint64_t seed = 0;
  RunConfig run;

  ColumnNormTargets targets() const;
  void validate() const;
};

/// First recorded iteration where ||G_k - H_k||_F^2 < l^2 / (2 n^2). From
/// there on every H_j must keep an eigen gap of at least nu / a.
struct EtfCertificate {
  std::size_t k = 0;
  double nu = 0.0;
  double gap_threshold = 0.0;
  double min_gap_after = 0.0;  // smallest recorded eigen gap at or after k
  bool gap_holds = false;      // min_gap_after >= gap_threshold - 1e-9
};

struct FrameDesignResult {
  Matrix d;       // designed n x l frame
  Matrix s_or_h;  // final structured iterate (S or H)
  IterateTrace trace;
  double a = 0.0;
  double xi = 0.0;
  double coherence = 0.0;
  double tightness_residual = 0.0;
  double gap = 0.0;  // ||x - y||_F at stop
  std::optional<EtfCertificate> certificate;
};

inline constexpr const char* kMinColumnNormMetric = "min_col_norm_x";
inline constexpr const char* kSigmaMinMetric = "sigma_min_y";
inline constexpr const char* kEigenGapMetric = "eigen_gap_y";

/// Seeded standard-normal n x l draw projected onto the column-norm set,
/// redrawn until sigma_min > 1e-6.
Matrix initial_column_norm_start(Eigen::Index n, Eigen::Index l,
                                 const ColumnNormTargets& targets, std::uint64_t seed);

struct EtfStart {
  Matrix g0;
  Matrix h0;
};

/// G0 = nearest a-tight Gram matrix to a seeded random symmetric matrix,
/// H0 = its nearest point in the coherence set.
EtfStart initial_etf_start(Eigen::Index n, Eigen::Index l, std::uint64_t seed);

/// Alternates between a-tight frames (a = sum(c)/n) and the column-norm set.
/// Records the column-norm and sigma_min guard quantities as extra metrics.
FrameDesignResult design_prescribed_norm_frame(const FrameDesignConfig& cfg);

/// Alternates between a-tight Gram matrices (a = l/n) and the relaxed
/// equiangular set with xi = welch_bound(n, l). Records the eigen gap of H_k.
FrameDesignResult design_etf(const FrameDesignConfig& cfg);

struct SeedOutcome {
  std::uint64_t seed = 0;
  std::optional<FrameDesignResult> result;
  std::exception_ptr error;
};

/// design_etf for each seed (cfg.seed is ignored), in seed order.
std::vector<SeedOutcome> design_etf_seeds(const FrameDesignConfig& cfg,
                                          const std::vector<std::uint64_t>& seeds,
                                          std::size_t threads = 1);

std::optional<EtfCertificate> find_etf_certificate(const IterateTrace& trace, Eigen::Index n,
                                                   Eigen::Index l);

}  // namespace altproj
