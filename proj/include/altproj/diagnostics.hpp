#pragma once

// Convergence certificates computed from an iterate trace: sufficient
// decrease (three-point constant), local contraction ratio, and a fitted KL
// exponent with its rate class.

#include "altproj/engine.hpp"

#include <optional>
#include <span>
#include <string>

namespace altproj {

/// alpha_hat = min over resolvable consecutive records of
/// (f_{k-1} - f_k) / dy_k^2. A step is resolvable when dy_k^2 exceeds the
/// rounding floor of the objective difference; decreases within rounding of
/// zero count as zero. Throws degenerate-trace when no step qualifies.
double check_sufficient_decrease(std::span<const TraceRecord> records);
double check_sufficient_decrease(const IterateTrace& trace);

/// beta_hat = max of dx_{k+1} / dy_k over consecutive records with
/// floor < dy_k <= epsilon, where floor = 1e-5 * max dy (pairs below the floor
/// are not resolved in double precision). Throws insufficient-data when no
/// pair qualifies.
double estimate_contraction(std::span<const TraceRecord> records, double epsilon);
double estimate_contraction(const IterateTrace& trace, double epsilon);

/// 90th percentile (nearest rank) of the positive dy values; the default
/// neighbourhood radius for the contraction estimate.
double default_contraction_epsilon(std::span<const TraceRecord> records);

struct AssumptionCertificate {
  double alpha_hat = 0.0;
  double beta_hat = 0.0;
  double epsilon_used = 0.0;
  std::size_t tail_start = 1;
  bool pass = false;
};

/// Evaluates both assumption constants on the tail of the trace where every
/// dy is within epsilon (defaulting to default_contraction_epsilon).
AssumptionCertificate certify_assumptions(std::span<const TraceRecord> records,
                                          std::optional<double> epsilon = std::nullopt);

enum class RateClass { finite, linear, sublinear };

const char* to_string(RateClass rc) noexcept;

struct KLEstimate {
  double theta_hat = 0.0;
  RateClass rate_class = RateClass::finite;
  std::optional<double> rho_hat;    // per-iteration factor, linear class
  std::optional<double> power_hat;  // decay exponent p of k^-p, sublinear class
  double fit_r2 = 1.0;
  std::size_t samples = 0;
};

inline constexpr std::size_t kMinKLSamples = 30;

/// Classifies a distance-to-limit sequence e_k sampled at iterations ks.
/// An exact zero means the limit was reached: finite class, theta = 0.
/// Otherwise log e is fitted against k (geometric) and against log k (power
/// law) and the model with the larger r^2 wins; ties go to geometric.
KLEstimate classify_error_decay(std::span<const double> ks, std::span<const double> errors);

/// Convenience overload with ks = 1, 2, ..., errors.size().
KLEstimate classify_error_decay(std::span<const double> errors);

enum class TailModel { geometric, power };

/// Distance proxy Q_k = sum_{i >= k} dy_i over the recorded tail, plus an
/// extrapolation of the unrecorded remainder from the last two steps (geometric
/// ratio, or local power-law slope). Requires one record per iteration.
std::vector<double> tail_sum_proxy(std::span<const TraceRecord> records,
                                   TailModel model = TailModel::geometric);

/// Fits the KL exponent of a trace through tail_sum_proxy. A trace that ends
/// on an exact fixed point (f = 0 or dy = 0) is classified finite. A sublinear
/// fit is refined with the power-law remainder.
KLEstimate estimate_kl_exponent(std::span<const TraceRecord> records);
KLEstimate estimate_kl_exponent(const IterateTrace& trace);

struct InequalityCheck {
  bool holds = true;
  double margin = 0.0;  // minimum of lhs - rhs over all k
  std::size_t checked = 0;
};

/// Three-point inequality
///   ||x_k - y_{k-1}||^2 - ||x_k - y_k||^2 >= constant * ||y_k - y_{k-1}||^2
/// at every stored iteration, with rounding slack `slack * (1 + lhs scale)`.
/// Throws insufficient-data when the trace holds no iterates.
InequalityCheck check_three_point(const IterateTrace& trace, double constant,
                                  double slack = 1e-10);

/// Three-point check for the prescribed-norm pipeline with constant
/// c_min / (c_max * sqrt(sum c)).
InequalityCheck check_three_point_frames(const IterateTrace& trace,
                                         const ColumnNormTargets& targets);

double three_point_frames_constant(const ColumnNormTargets& targets);

enum class GuardStatus { holds, violated, not_applicable };

const char* to_string(GuardStatus s) noexcept;

struct Prop1GuardReport {
  GuardStatus status = GuardStatus::not_applicable;
  double min_column_norm = 0.0;   // min over k >= 1 and columns of ||d_l||
  double column_norm_bound = 0.0; // c_min / sqrt(sum c)
  double min_sigma = 0.0;         // min over k >= 1 of sigma_min(S_k)
  double sigma_bound = 0.0;       // sqrt(c_min)
};

/// Column-norm and smallest-singular-value guards on D_k, S_k for k >= 1,
/// with slack 1e-9. Not applicable when S_0 is rank deficient or has a zero
/// column. Throws insufficient-data when the trace holds no iterates.
Prop1GuardReport check_prop1_guards(const IterateTrace& trace, const ColumnNormTargets& targets);

/// Same guards evaluated from per-step minima already reduced to scalars.
Prop1GuardReport evaluate_prop1_guards(double min_column_norm, double min_sigma,
                                       const ColumnNormTargets& targets);

/// Local contraction bound for the prescribed-norm pipeline:
/// dx_{k+1} / dy_k <= sum(c) / (n * sqrt(c_min)) + 1e-6 for every consecutive
/// pair with dy_k > 0.
InequalityCheck check_contraction_bound(std::span<const TraceRecord> records, double bound,
                                        double slack = 1e-6);

double norms_contraction_bound(const ColumnNormTargets& targets, Eigen::Index n);

/// f nonincreasing within 1e-12 * (1 + f_first).
bool objective_monotone(std::span<const TraceRecord> records);

/// residual == 2 * dy bitwise on every record.
bool residual_identity_holds(std::span<const TraceRecord> records);

struct DiagnosticsReport {
  std::size_t records = 0;
  bool monotone = true;
  bool residual_identity = true;
  std::optional<double> alpha_hat;
  std::string alpha_status = "ok";
  std::optional<AssumptionCertificate> certificate;
  std::string certificate_status = "ok";
  std::optional<KLEstimate> kl;
  std::string kl_status = "ok";
};

/// Runs every trace-level diagnostic, recording abstentions (for example
/// "insufficient-data") in the status fields instead of throwing.
DiagnosticsReport diagnose(std::span<const TraceRecord> records);

}  // namespace altproj
