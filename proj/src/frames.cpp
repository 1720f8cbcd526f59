#include "altproj/frames.hpp"

#include "altproj/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace altproj {

namespace {

constexpr double kGapSlack = 1e-9;

Matrix standard_normal(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  // Column-major fill keeps the draw order independent of Eigen internals.
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

double etf_threshold(Eigen::Index n, Eigen::Index l) {
  const auto nd = static_cast<double>(n);
  const auto ld = static_cast<double>(l);
  return ld * ld / (2.0 * nd * nd);
}

}  // namespace

double welch_bound(Eigen::Index n, Eigen::Index l) {
  if (n < 1 || l < 2 || n > l) {
    fail(ErrorCode::invalid_input, "welch_bound: need 1 <= n <= l and l >= 2");
  }
  const auto nd = static_cast<double>(n);
  const auto ld = static_cast<double>(l);
  return std::sqrt((ld - nd) / (nd * (ld - 1.0)));
}

bool etf_known_to_exist(Eigen::Index n, Eigen::Index l) {
  if (n < 1 || n > l) return false;
  if (l == n || l == n + 1) return true;
  static constexpr std::pair<Eigen::Index, Eigen::Index> kKnown[] = {
      {3, 6}, {5, 10}, {6, 16}, {7, 14}, {7, 28}, {9, 18}, {13, 26}, {15, 36}, {19, 76},
  };
  for (const auto& [kn, kl] : kKnown) {
    if (l == kl && (n == kn || n == kl - kn)) return true;
  }
  return false;
}

bool exceeds_gerzon_bound(Eigen::Index n, Eigen::Index l) { return 2 * l > n * (n + 1); }

double mutual_coherence(const Matrix& d) {
  require_finite(d, "mutual_coherence");
  if (d.cols() < 2) fail(ErrorCode::invalid_input, "mutual_coherence: need at least two columns");
  const Vector norms = d.colwise().norm().transpose();
  if ((norms.array() == 0.0).any()) {
    fail(ErrorCode::invalid_input, "mutual_coherence: zero column");
  }
  const Matrix unit = d * norms.cwiseInverse().asDiagonal();
  double mu = 0.0;
  for (Eigen::Index j = 0; j < unit.cols(); ++j) {
    for (Eigen::Index i = j + 1; i < unit.cols(); ++i) {
      mu = std::max(mu, std::abs(unit.col(i).dot(unit.col(j))));
    }
  }
  return std::min(mu, 1.0);
}

double tight_parameter(const ColumnNormTargets& c, Eigen::Index n) {
  if (n < 1) fail(ErrorCode::invalid_input, "tight_parameter: n must be positive");
  return c.sum() / static_cast<double>(n);
}

double tightness_residual(const Matrix& d, double a) {
  require_finite(d, "tightness_residual");
  return (d * d.transpose() - a * Matrix::Identity(d.rows(), d.rows())).norm();
}

Matrix extract_frame_from_gram(const Matrix& g, Eigen::Index n, double a) {
  if (n < 1 || n > g.rows()) fail(ErrorCode::invalid_input, "extract_frame_from_gram: bad n");
  if (!(a > 0.0)) fail(ErrorCode::invalid_input, "extract_frame_from_gram: a must be positive");
  const SymEigResult eig = sym_eig_desc(g);
  if (eig.eigvals(n - 1) <= 1e-12) {
    fail(ErrorCode::rank_deficient, "extract_frame_from_gram: lambda_n <= 1e-12");
  }
  return std::sqrt(a) * eig.eigvecs.leftCols(n).transpose();
}

double eigen_gap(const Matrix& h, Eigen::Index n) {
  if (h.rows() != h.cols() || n < 1 || n >= h.rows()) {
    fail(ErrorCode::invalid_input, "eigen_gap: need a square matrix and 1 <= n < size");
  }
  const SymEigResult eig = sym_eig_desc(h);
  return eig.eigvals(n - 1) - eig.eigvals(n);
}

EtfInitCheck check_etf_initialization(const Matrix& g0, const Matrix& h0, Eigen::Index n,
                                      Eigen::Index l) {
  if (g0.rows() != l || g0.cols() != l || h0.rows() != l || h0.cols() != l || n < 1 || n > l) {
    fail(ErrorCode::invalid_input, "check_etf_initialization: shapes must be l x l");
  }
  EtfInitCheck out;
  out.nu = etf_threshold(n, l) - (g0 - h0).squaredNorm();
  out.certified = out.nu > 0.0;
  if (out.certified) {
    const double a = static_cast<double>(l) / static_cast<double>(n);
    out.gap_threshold = out.nu / a;
  }
  return out;
}

ColumnNormTargets FrameDesignConfig::targets() const {
  return c ? *c : ColumnNormTargets::ones(static_cast<std::size_t>(l));
}

void FrameDesignConfig::validate() const {
  if (n < 1 || l < n) fail(ErrorCode::invalid_input, "frame design: need 1 <= n <= l");
  if (c && c->size() != static_cast<std::size_t>(l)) {
    fail(ErrorCode::invalid_input, "frame design: c must have l entries");
  }
  run.validate();
}

Matrix initial_column_norm_start(Eigen::Index n, Eigen::Index l,
                                 const ColumnNormTargets& targets, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const Matrix s0 = project_column_norms(standard_normal(n, l, rng), targets);
    if (sigma_min(s0) > 1e-6) return s0;
  }
  fail(ErrorCode::numerical_failure, "could not draw a full-rank initial frame");
}

EtfStart initial_etf_start(Eigen::Index n, Eigen::Index l, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Matrix b = standard_normal(l, l, rng);
  const Matrix sym = 0.5 * (b + b.transpose());
  const double a = static_cast<double>(l) / static_cast<double>(n);
  EtfStart start;
  start.g0 = project_gram_tight(sym, n, a).gram;
  start.h0 = project_gram_coherence(start.g0, welch_bound(n, l));
  return start;
}

FrameDesignResult design_prescribed_norm_frame(const FrameDesignConfig& cfg) {
  cfg.validate();
  const ColumnNormTargets targets = cfg.targets();
  const double a = tight_parameter(targets, cfg.n);

  RunConfig run = cfg.run;
  run.extra_metrics.push_back({kMinColumnNormMetric, [](const Matrix& x, const Matrix&) {
                                 return x.colwise().norm().minCoeff();
                               }});
  run.extra_metrics.push_back(
      {kSigmaMinMetric, [](const Matrix&, const Matrix& y) { return sigma_min(y); }});

  const Projector px = tight_frame_set(cfg.n, cfg.l, a);
  const Projector py = column_norm_set(cfg.n, targets);
  const Matrix s0 = initial_column_norm_start(cfg.n, cfg.l, targets, cfg.seed);

  FrameDesignResult res;
  res.trace = run_alternating_projections(px, py, s0, run);
  res.a = a;
  res.d = res.trace.final_x;
  res.s_or_h = res.trace.final_y;
  res.gap = (res.d - res.s_or_h).norm();
  res.tightness_residual = tightness_residual(res.d, a);
  res.coherence = cfg.l >= 2 ? mutual_coherence(res.d) : 0.0;
  return res;
}

std::optional<EtfCertificate> find_etf_certificate(const IterateTrace& trace, Eigen::Index n,
                                                   Eigen::Index l) {
  const double threshold = etf_threshold(n, l);
  const double a = static_cast<double>(l) / static_cast<double>(n);
  const auto gap_index = trace.extra_index(kEigenGapMetric);
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    if (!(trace.records[i].f < threshold)) continue;
    EtfCertificate cert;
    cert.k = trace.records[i].k;
    cert.nu = threshold - trace.records[i].f;
    cert.gap_threshold = cert.nu / a;
    cert.min_gap_after = std::numeric_limits<double>::infinity();
    if (gap_index) {
      for (std::size_t j = i; j < trace.records.size(); ++j) {
        cert.min_gap_after = std::min(cert.min_gap_after, trace.records[j].extras[*gap_index]);
      }
    }
    cert.gap_holds = cert.min_gap_after >= cert.gap_threshold - kGapSlack;
    return cert;
  }
  return std::nullopt;
}

namespace {

RunConfig etf_run_config(const FrameDesignConfig& cfg) {
  RunConfig run = cfg.run;
  if (cfg.n < cfg.l) {
    const Eigen::Index n = cfg.n;
    run.extra_metrics.push_back(
        {kEigenGapMetric, [n](const Matrix&, const Matrix& y) { return eigen_gap(y, n); }});
  }
  return run;
}

FrameDesignResult finish_etf(const FrameDesignConfig& cfg, IterateTrace trace) {
  FrameDesignResult res;
  res.a = static_cast<double>(cfg.l) / static_cast<double>(cfg.n);
  res.xi = welch_bound(cfg.n, cfg.l);
  res.trace = std::move(trace);
  res.s_or_h = res.trace.final_y;
  res.gap = (res.trace.final_x - res.trace.final_y).norm();
  res.d = extract_frame_from_gram(res.trace.final_x, cfg.n, res.a);
  res.tightness_residual = tightness_residual(res.d, res.a);
  res.coherence = mutual_coherence(res.d);
  res.certificate = find_etf_certificate(res.trace, cfg.n, cfg.l);
  return res;
}

void validate_etf(const FrameDesignConfig& cfg) {
  cfg.validate();
  if (cfg.l < 2) fail(ErrorCode::invalid_input, "design_etf: need l >= 2");
}

}  // namespace

FrameDesignResult design_etf(const FrameDesignConfig& cfg) {
  validate_etf(cfg);
  const double a = static_cast<double>(cfg.l) / static_cast<double>(cfg.n);
  const double xi = welch_bound(cfg.n, cfg.l);
  const Projector px = gram_tight_set(cfg.l, cfg.n, a);
  const Projector py = gram_coherence_set(cfg.l, xi);
  const EtfStart start = initial_etf_start(cfg.n, cfg.l, cfg.seed);
  return finish_etf(cfg, run_alternating_projections(px, py, start.h0, etf_run_config(cfg)));
}

std::vector<SeedOutcome> design_etf_seeds(const FrameDesignConfig& cfg,
                                          const std::vector<std::uint64_t>& seeds,
                                          std::size_t threads) {
  validate_etf(cfg);
  const double a = static_cast<double>(cfg.l) / static_cast<double>(cfg.n);
  const Projector px = gram_tight_set(cfg.l, cfg.n, a);
  const Projector py = gram_coherence_set(cfg.l, welch_bound(cfg.n, cfg.l));
  std::vector<Matrix> starts;
  starts.reserve(seeds.size());
  for (std::uint64_t seed : seeds) starts.push_back(initial_etf_start(cfg.n, cfg.l, seed).h0);

  std::vector<StartOutcome> runs = multi_start(px, py, starts, etf_run_config(cfg), threads);
  std::vector<SeedOutcome> out(seeds.size());
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    out[i].seed = seeds[i];
    if (!runs[i].ok()) {
      out[i].error = runs[i].error;
      continue;
    }
    try {
      out[i].result = finish_etf(cfg, std::move(*runs[i].trace));
    } catch (...) {
      out[i].error = std::current_exception();
    }
  }
  return out;
}

}  // namespace altproj
