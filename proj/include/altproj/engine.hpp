#pragma once

#include "altproj/projections.hpp"

#include <cstddef>
#include <exception>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace altproj {

/// Scalar functional of the current iterate pair, recorded per step.
struct NamedMetric {
  std::string name;
  std::function<double(const Matrix& x, const Matrix& y)> eval;
};

struct RunConfig {
  std::size_t max_iter = 1000;
  /// Stop once ||x_k - y_k||_F <= tol.
  double tol = 1e-10;
  std::size_t record_every = 1;
  std::vector<NamedMetric> extra_metrics;
  /// Optional stagnation rule: stop once dy <= stagnation_tol for
  /// `stagnation_window` consecutive iterations.
  std::optional<double> stagnation_tol;
  std::size_t stagnation_window = 50;
  /// Keep every iterate pair (debug mode).
  bool keep_iterates = false;

  void validate() const;
};

enum class StopReason { tolerance, max_iter, stagnation };

const char* to_string(StopReason reason) noexcept;

struct TraceRecord {
  std::size_t k = 0;
  double f = 0.0;         // ||x_k - y_k||_F^2
  double dx = 0.0;        // ||x_k - x_{k-1}||_F, NaN for k = 1 (no x_0)
  double dy = 0.0;        // ||y_k - y_{k-1}||_F
  double residual = 0.0;  // 2 * dy
  std::vector<double> extras;
};

struct IterateHistory {
  Matrix y0;
  std::vector<Matrix> x;  // x[i] is x_{i+1}
  std::vector<Matrix> y;  // y[i] is y_{i+1}
};

struct IterateTrace {
  std::vector<std::string> extra_names;
  std::vector<TraceRecord> records;
  Matrix final_x;
  Matrix final_y;
  StopReason stop_reason = StopReason::max_iter;
  std::size_t iterations = 0;
  /// Present when RunConfig::keep_iterates was set. Holds every iteration,
  /// independent of record_every.
  std::optional<IterateHistory> iterates;

  /// Index of an extra metric by name, or nullopt.
  std::optional<std::size_t> extra_index(const std::string& name) const;
};

/// Alternating projections: x_{k+1} = px(y_k), y_{k+1} = py(x_{k+1}).
/// Throws invalid-input if y0 is not in py (tolerance 1e-8), and
/// numerical-failure (with the iteration) on a non-finite iterate.
IterateTrace run_alternating_projections(const Projector& px, const Projector& py,
                                         const Matrix& y0, const RunConfig& cfg);

struct StartOutcome {
  std::optional<IterateTrace> trace;
  std::exception_ptr error;

  bool ok() const noexcept { return trace.has_value(); }
};

/// One independent run per start, results in start order. A failing start does
/// not abort the others. `threads` caps concurrency (0 = hardware concurrency).
std::vector<StartOutcome> multi_start(const Projector& px, const Projector& py,
                                      const std::vector<Matrix>& starts, const RunConfig& cfg,
                                      std::size_t threads = 1);

/// Applies fn to 0..count-1 on up to `threads` worker threads (0 = hardware
/// concurrency). fn must be safe to call concurrently for distinct indices.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace altproj
