#include "altproj/engine.hpp"

#include "altproj/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace altproj {

namespace {

constexpr double kStartFeasibilityTol = 1e-8;

void require_finite_iterate(const Matrix& m, const char* which, std::size_t k) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::numerical_failure,
                std::string("non-finite ") + which + " iterate at k=" + std::to_string(k), k);
  }
}

}  // namespace

void RunConfig::validate() const {
  if (max_iter < 1) fail(ErrorCode::invalid_input, "run config: max_iter must be >= 1");
  if (!(tol > 0.0) || !std::isfinite(tol)) {
    fail(ErrorCode::invalid_input, "run config: tol must be positive");
  }
  if (record_every < 1) fail(ErrorCode::invalid_input, "run config: record_every must be >= 1");
  if (stagnation_tol && !(*stagnation_tol >= 0.0)) {
    fail(ErrorCode::invalid_input, "run config: stagnation_tol must be nonnegative");
  }
  if (stagnation_window < 1) {
    fail(ErrorCode::invalid_input, "run config: stagnation_window must be >= 1");
  }
  for (const auto& m : extra_metrics) {
    if (m.name.empty() || !m.eval) {
      fail(ErrorCode::invalid_input, "run config: extra metric needs a name and a function");
    }
  }
}

const char* to_string(StopReason reason) noexcept {
  switch (reason) {
    case StopReason::tolerance: return "tolerance";
    case StopReason::max_iter: return "max_iter";
    case StopReason::stagnation: return "stagnation";
  }
  return "unknown";
}

std::optional<std::size_t> IterateTrace::extra_index(const std::string& name) const {
  const auto it = std::find(extra_names.begin(), extra_names.end(), name);
  if (it == extra_names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - extra_names.begin());
}

IterateTrace run_alternating_projections(const Projector& px, const Projector& py,
                                         const Matrix& y0, const RunConfig& cfg) {
  cfg.validate();
  if (px.shape() != py.shape()) {
    fail(ErrorCode::invalid_input, "projectors " + px.name() + " and " + py.name() +
                                       " have different ambient shapes");
  }
  if (shape_of(y0) != py.shape() || !py.contains(y0, kStartFeasibilityTol)) {
    fail(ErrorCode::invalid_input, "initial point is not in " + py.name());
  }

  IterateTrace trace;
  for (const auto& m : cfg.extra_metrics) trace.extra_names.push_back(m.name);
  if (cfg.keep_iterates) trace.iterates = IterateHistory{y0, {}, {}};

  Matrix x;
  Matrix y = y0;
  std::size_t stagnant = 0;

  for (std::size_t k = 1; k <= cfg.max_iter; ++k) {
    Matrix x_next = px.project(y);
    require_finite_iterate(x_next, "x", k);
    Matrix y_next = py.project(x_next);
    require_finite_iterate(y_next, "y", k);

    TraceRecord rec;
    rec.k = k;
    rec.f = (x_next - y_next).squaredNorm();
    rec.dx = k == 1 ? std::numeric_limits<double>::quiet_NaN() : (x_next - x).norm();
    rec.dy = (y_next - y).norm();
    rec.residual = 2.0 * rec.dy;

    std::optional<StopReason> stop;
    if (std::sqrt(rec.f) <= cfg.tol) {
      stop = StopReason::tolerance;
    } else if (cfg.stagnation_tol) {
      stagnant = rec.dy <= *cfg.stagnation_tol ? stagnant + 1 : 0;
      if (stagnant >= cfg.stagnation_window) stop = StopReason::stagnation;
    }
    if (!stop && k == cfg.max_iter) stop = StopReason::max_iter;

    if (k == 1 || k % cfg.record_every == 0 || stop) {
      rec.extras.reserve(cfg.extra_metrics.size());
      for (const auto& m : cfg.extra_metrics) rec.extras.push_back(m.eval(x_next, y_next));
      trace.records.push_back(std::move(rec));
    }
    if (trace.iterates) {
      trace.iterates->x.push_back(x_next);
      trace.iterates->y.push_back(y_next);
    }

    x = std::move(x_next);
    y = std::move(y_next);
    trace.iterations = k;
    if (stop) {
      trace.stop_reason = *stop;
      break;
    }
  }

  trace.final_x = std::move(x);
  trace.final_y = std::move(y);
  return trace;
}

void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> workers;
  workers.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
}

std::vector<StartOutcome> multi_start(const Projector& px, const Projector& py,
                                      const std::vector<Matrix>& starts, const RunConfig& cfg,
                                      std::size_t threads) {
  std::vector<StartOutcome> out(starts.size());
  parallel_for(starts.size(), threads, [&](std::size_t i) {
    try {
      out[i].trace = run_alternating_projections(px, py, starts[i], cfg);
    } catch (...) {
      out[i].error = std::current_exception();
    }
  });
  return out;
}

}  // namespace altproj
