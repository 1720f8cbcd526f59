#include "altproj/diagnostics.hpp"

#include "altproj/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace altproj {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
// Smallest dy^2 / f ratio at which an objective difference is resolvable.
constexpr double kDecreaseResolution = 64.0 * kEps;
// Rounding band for an objective difference, relative to f.
constexpr double kDecreaseRounding = 4.0 * kEps;
constexpr double kContractionFloor = 1e-5;
constexpr double kGuardSlack = 1e-9;

bool consecutive(const TraceRecord& prev, const TraceRecord& next) {
  return next.k == prev.k + 1;
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

LineFit fit_line(std::span<const double> xs, std::span<const double> ys) {
  const auto n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss_res += r * r;
  }
  fit.r2 = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  return fit;
}

const IterateHistory& require_iterates(const IterateTrace& trace) {
  if (!trace.iterates || trace.iterates->y.empty()) {
    fail(ErrorCode::insufficient_data, "trace does not hold full iterates");
  }
  return *trace.iterates;
}

}  // namespace

double check_sufficient_decrease(std::span<const TraceRecord> records) {
  double alpha = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < records.size(); ++i) {
    const TraceRecord& prev = records[i - 1];
    const TraceRecord& cur = records[i];
    const double dy2 = cur.dy * cur.dy;
    if (!(cur.dy > 0.0) || dy2 <= kDecreaseResolution * prev.f) continue;
    double decrease = prev.f - cur.f;
    if (std::abs(decrease) <= kDecreaseRounding * std::max(prev.f, cur.f)) decrease = 0.0;
    alpha = std::min(alpha, decrease / dy2);
  }
  if (std::isinf(alpha)) {
    fail(ErrorCode::degenerate_trace, "no step with a resolvable y-movement (already converged)");
  }
  return alpha;
}

double check_sufficient_decrease(const IterateTrace& trace) {
  return check_sufficient_decrease(trace.records);
}

double estimate_contraction(std::span<const TraceRecord> records, double epsilon) {
  if (!(epsilon > 0.0)) fail(ErrorCode::invalid_input, "contraction epsilon must be positive");
  double max_dy = 0.0;
  for (const auto& r : records) {
    if (std::isfinite(r.dy)) max_dy = std::max(max_dy, r.dy);
  }
  const double floor = kContractionFloor * max_dy;
  double beta = -1.0;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const TraceRecord& prev = records[i - 1];
    const TraceRecord& next = records[i];
    if (!consecutive(prev, next) || !std::isfinite(next.dx)) continue;
    if (prev.dy > floor && prev.dy > 0.0 && prev.dy <= epsilon) {
      beta = std::max(beta, next.dx / prev.dy);
    }
  }
  if (beta < 0.0) {
    fail(ErrorCode::insufficient_data, "no consecutive steps with 0 < dy <= epsilon");
  }
  return beta;
}

double estimate_contraction(const IterateTrace& trace, double epsilon) {
  return estimate_contraction(trace.records, epsilon);
}

double default_contraction_epsilon(std::span<const TraceRecord> records) {
  std::vector<double> dys;
  for (const auto& r : records) {
    if (r.dy > 0.0 && std::isfinite(r.dy)) dys.push_back(r.dy);
  }
  if (dys.empty()) fail(ErrorCode::degenerate_trace, "every dy is zero");
  std::sort(dys.begin(), dys.end());
  const auto rank = static_cast<std::size_t>(std::ceil(0.9 * static_cast<double>(dys.size())));
  return dys[std::max<std::size_t>(rank, 1) - 1];
}

AssumptionCertificate certify_assumptions(std::span<const TraceRecord> records,
                                          std::optional<double> epsilon) {
  AssumptionCertificate cert;
  cert.epsilon_used = epsilon ? *epsilon : default_contraction_epsilon(records);
  // First record after which every dy stays within epsilon.
  std::size_t start = records.size();
  while (start > 0 && records[start - 1].dy <= cert.epsilon_used) --start;
  if (start == records.size()) {
    fail(ErrorCode::insufficient_data, "trace never enters the epsilon neighbourhood");
  }
  cert.tail_start = records[start].k;
  // Include the record just before the tail so its first step is paired.
  const auto tail = records.subspan(start > 0 ? start - 1 : 0);
  cert.alpha_hat = check_sufficient_decrease(tail);
  cert.beta_hat = estimate_contraction(tail, cert.epsilon_used);
  cert.pass = cert.alpha_hat > 0.0 && std::isfinite(cert.beta_hat);
  return cert;
}

const char* to_string(RateClass rc) noexcept {
  switch (rc) {
    case RateClass::finite: return "finite";
    case RateClass::linear: return "linear";
    case RateClass::sublinear: return "sublinear";
  }
  return "unknown";
}

KLEstimate classify_error_decay(std::span<const double> ks, std::span<const double> errors) {
  if (ks.size() != errors.size()) {
    fail(ErrorCode::invalid_input, "classify_error_decay: length mismatch");
  }
  KLEstimate est;
  est.samples = errors.size();
  for (double e : errors) {
    if (!std::isfinite(e) || e < 0.0) {
      fail(ErrorCode::invalid_input, "classify_error_decay: errors must be finite and nonnegative");
    }
    if (e == 0.0) {
      est.rate_class = RateClass::finite;
      est.theta_hat = 0.0;
      est.fit_r2 = 1.0;
      return est;
    }
  }
  if (errors.size() < kMinKLSamples) {
    fail(ErrorCode::insufficient_data,
         "need at least " + std::to_string(kMinKLSamples) + " samples, got " +
             std::to_string(errors.size()));
  }
  std::vector<double> log_e(errors.size()), log_k(ks.size());
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!(ks[i] > 0.0)) fail(ErrorCode::invalid_input, "classify_error_decay: k must be positive");
    log_e[i] = std::log(errors[i]);
    log_k[i] = std::log(ks[i]);
  }
  if (std::all_of(log_e.begin(), log_e.end(), [&](double v) { return v == log_e.front(); })) {
    fail(ErrorCode::degenerate_trace, "error proxy does not decay");
  }
  const LineFit geometric = fit_line(ks, log_e);
  const LineFit power = fit_line(log_k, log_e);
  if (geometric.slope >= 0.0 && power.slope >= 0.0) {
    fail(ErrorCode::degenerate_trace, "error proxy does not decay");
  }
  if (geometric.r2 >= power.r2 && geometric.slope < 0.0) {
    est.rate_class = RateClass::linear;
    est.theta_hat = 0.5;
    est.rho_hat = std::exp(geometric.slope);
    est.fit_r2 = geometric.r2;
  } else {
    const double p = -power.slope;
    est.rate_class = RateClass::sublinear;
    est.power_hat = p;
    est.theta_hat = (1.0 + p) / (1.0 + 2.0 * p);
    est.fit_r2 = power.r2;
  }
  return est;
}

KLEstimate classify_error_decay(std::span<const double> errors) {
  std::vector<double> ks(errors.size());
  std::iota(ks.begin(), ks.end(), 1.0);
  return classify_error_decay(ks, errors);
}

namespace {

// Remainder sum_{i > K} dy_i beyond the last record, extrapolated from the
// last two steps.
double tail_remainder(std::span<const TraceRecord> records, TailModel model) {
  const std::size_t n = records.size();
  if (n < 2) return 0.0;
  const double last = records[n - 1].dy;
  const double before = records[n - 2].dy;
  if (!(last > 0.0 && before > 0.0 && last < before)) return 0.0;
  if (model == TailModel::geometric) {
    const double r = last / before;
    return last * r / (1.0 - r);
  }
  // dy_k ~ C k^-s, remainder ~ integral from K + 1/2 to infinity.
  const double k = static_cast<double>(records[n - 1].k);
  const double s = std::log(before / last) / std::log(k / (k - 1.0));
  if (!(s > 1.0)) return 0.0;
  return last * std::pow(k, s) * std::pow(k + 0.5, 1.0 - s) / (s - 1.0);
}

}  // namespace

std::vector<double> tail_sum_proxy(std::span<const TraceRecord> records, TailModel model) {
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (!consecutive(records[i - 1], records[i])) {
      fail(ErrorCode::invalid_input, "tail sums need one record per iteration");
    }
  }
  std::vector<double> q(records.size());
  double acc = tail_remainder(records, model);
  for (std::size_t i = records.size(); i-- > 0;) {
    acc += records[i].dy;
    q[i] = acc;
  }
  return q;
}

KLEstimate estimate_kl_exponent(std::span<const TraceRecord> records) {
  if (records.empty()) fail(ErrorCode::insufficient_data, "empty trace");
  const TraceRecord& last = records.back();
  if (last.f == 0.0 || last.dy == 0.0) {
    KLEstimate est;
    est.rate_class = RateClass::finite;
    est.theta_hat = 0.0;
    est.fit_r2 = 1.0;
    est.samples = records.size();
    return est;
  }
  if (records.size() < kMinKLSamples) {
    fail(ErrorCode::insufficient_data,
         "need at least " + std::to_string(kMinKLSamples) + " records, got " +
             std::to_string(records.size()));
  }
  std::vector<double> ks(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) ks[i] = static_cast<double>(records[i].k);
  KLEstimate est = classify_error_decay(ks, tail_sum_proxy(records, TailModel::geometric));
  if (est.rate_class == RateClass::sublinear) {
    // Refit with a remainder consistent with the power-law class.
    const KLEstimate refit = classify_error_decay(ks, tail_sum_proxy(records, TailModel::power));
    if (refit.rate_class == RateClass::sublinear) est = refit;
  }
  return est;
}

KLEstimate estimate_kl_exponent(const IterateTrace& trace) {
  return estimate_kl_exponent(trace.records);
}

InequalityCheck check_three_point(const IterateTrace& trace, double constant, double slack) {
  const IterateHistory& it = require_iterates(trace);
  InequalityCheck out;
  out.margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < it.y.size(); ++i) {
    const Matrix& x = it.x[i];
    const Matrix& y = it.y[i];
    const Matrix& y_prev = i == 0 ? it.y0 : it.y[i - 1];
    const double before = (x - y_prev).squaredNorm();
    const double lhs = before - (x - y).squaredNorm();
    const double rhs = constant * (y - y_prev).squaredNorm();
    const double margin = lhs - rhs;
    out.margin = std::min(out.margin, margin);
    if (margin < -slack * (1.0 + before)) out.holds = false;
    ++out.checked;
  }
  return out;
}

double three_point_frames_constant(const ColumnNormTargets& targets) {
  return targets.min() / (targets.max() * std::sqrt(targets.sum()));
}

InequalityCheck check_three_point_frames(const IterateTrace& trace,
                                         const ColumnNormTargets& targets) {
  return check_three_point(trace, three_point_frames_constant(targets));
}

const char* to_string(GuardStatus s) noexcept {
  switch (s) {
    case GuardStatus::holds: return "holds";
    case GuardStatus::violated: return "violated";
    case GuardStatus::not_applicable: return "not-applicable";
  }
  return "unknown";
}

Prop1GuardReport evaluate_prop1_guards(double min_column_norm, double min_sigma,
                                       const ColumnNormTargets& targets) {
  Prop1GuardReport rep;
  rep.column_norm_bound = targets.min() / std::sqrt(targets.sum());
  rep.sigma_bound = std::sqrt(targets.min());
  rep.min_column_norm = min_column_norm;
  rep.min_sigma = min_sigma;
  const bool ok = min_column_norm >= rep.column_norm_bound - kGuardSlack &&
                  min_sigma >= rep.sigma_bound - kGuardSlack;
  rep.status = ok ? GuardStatus::holds : GuardStatus::violated;
  return rep;
}

Prop1GuardReport check_prop1_guards(const IterateTrace& trace, const ColumnNormTargets& targets) {
  const IterateHistory& it = require_iterates(trace);
  const Matrix& s0 = it.y0;
  const bool zero_column = (s0.colwise().norm().array() == 0.0).any();
  const bool full_rank = s0.rows() <= s0.cols() && sigma_min(s0) > 1e-12 * std::max(1.0, s0.norm());
  if (zero_column || !full_rank) {
    Prop1GuardReport rep;
    rep.status = GuardStatus::not_applicable;
    return rep;
  }
  double min_col = std::numeric_limits<double>::infinity();
  double min_sig = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < it.y.size(); ++i) {
    min_col = std::min(min_col, it.x[i].colwise().norm().minCoeff());
    min_sig = std::min(min_sig, sigma_min(it.y[i]));
  }
  return evaluate_prop1_guards(min_col, min_sig, targets);
}

double norms_contraction_bound(const ColumnNormTargets& targets, Eigen::Index n) {
  return targets.sum() / (static_cast<double>(n) * std::sqrt(targets.min()));
}

InequalityCheck check_contraction_bound(std::span<const TraceRecord> records, double bound,
                                        double slack) {
  InequalityCheck out;
  out.margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < records.size(); ++i) {
    const TraceRecord& prev = records[i - 1];
    const TraceRecord& next = records[i];
    if (!consecutive(prev, next) || !(prev.dy > 0.0) || !std::isfinite(next.dx)) continue;
    const double margin = bound - next.dx / prev.dy;
    out.margin = std::min(out.margin, margin);
    if (margin < -slack) out.holds = false;
    ++out.checked;
  }
  return out;
}

bool objective_monotone(std::span<const TraceRecord> records) {
  if (records.empty()) return true;
  const double slack = 1e-12 * (1.0 + records.front().f);
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].f > records[i - 1].f + slack) return false;
  }
  return true;
}

bool residual_identity_holds(std::span<const TraceRecord> records) {
  return std::all_of(records.begin(), records.end(),
                     [](const TraceRecord& r) { return r.residual == 2.0 * r.dy; });
}

DiagnosticsReport diagnose(std::span<const TraceRecord> records) {
  DiagnosticsReport rep;
  rep.records = records.size();
  rep.monotone = objective_monotone(records);
  rep.residual_identity = residual_identity_holds(records);
  try {
    rep.alpha_hat = check_sufficient_decrease(records);
  } catch (const Error& e) {
    rep.alpha_status = to_string(e.code());
  }
  try {
    rep.certificate = certify_assumptions(records);
  } catch (const Error& e) {
    rep.certificate_status = to_string(e.code());
  }
  try {
    rep.kl = estimate_kl_exponent(records);
  } catch (const Error& e) {
    rep.kl_status = to_string(e.code());
  }
  return rep;
}

}  // namespace altproj
