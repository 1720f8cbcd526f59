#include "altproj/cli/commands.hpp"

#include "altproj/cli/config.hpp"
#include "altproj/cli/trace_io.hpp"
#include "altproj/error.hpp"
#include "altproj/frames.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

namespace altproj::cli {

namespace fs = std::filesystem;

namespace {

// Best-effort coherence counts as attaining the Welch bound within this slack.
constexpr double kWelchSlack = 5e-3;

const std::set<std::string> kRunKeys = {"max_iter", "tol", "record_every", "stagnation_tol",
                                        "stagnation_window"};

std::set<std::string> with_run_keys(std::set<std::string> keys) {
  keys.insert(kRunKeys.begin(), kRunKeys.end());
  return keys;
}

RunConfig run_config(const KeyValueConfig& cfg, bool keep_iterates) {
  RunConfig run;
  run.max_iter = cfg.count("max_iter");
  run.tol = cfg.number("tol");
  if (auto v = cfg.optional_count("record_every")) run.record_every = *v;
  run.stagnation_tol = cfg.optional_number("stagnation_tol");
  if (auto v = cfg.optional_count("stagnation_window")) run.stagnation_window = *v;
  run.keep_iterates = keep_iterates;
  run.validate();
  return run;
}

Eigen::Index dimension(const KeyValueConfig& cfg, const std::string& key) {
  const std::uint64_t v = cfg.count(key);
  if (v == 0 || v > 100000) fail(ErrorCode::invalid_input, "key '" + key + "' out of range");
  return static_cast<Eigen::Index>(v);
}

Json echo_value(const std::string& text) {
  if (auto v = parse_double(text)) return *v;
  if (text.find(',') != std::string::npos) {
    Json arr = Json::array();
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto first = item.find_first_not_of(' ');
      const auto last = item.find_last_not_of(' ');
      item = first == std::string::npos ? "" : item.substr(first, last - first + 1);
      auto v = parse_double(item);
      if (!v) return text;
      arr.push_back(*v);
    }
    return arr;
  }
  return text;
}

Json config_echo(const KeyValueConfig& cfg) {
  Json out = Json::object();
  for (const auto& [key, value] : cfg.entries()) out[key] = echo_value(value);
  return out;
}

Json number_or_null(std::optional<double> v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

Json vector_json(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.size(); ++i) out.push_back(m(i));
  return out;
}

std::string matrix_csv(const Matrix& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

Json inequality_json(const InequalityCheck& c) {
  return Json{{"holds", c.holds}, {"margin", number_or_null(c.margin)}, {"checked", c.checked}};
}

Json guard_json(const Prop1GuardReport& g) {
  return Json{{"status", to_string(g.status)},
              {"min_column_norm", number_or_null(g.min_column_norm)},
              {"column_norm_bound", g.column_norm_bound},
              {"min_sigma", number_or_null(g.min_sigma)},
              {"sigma_bound", g.sigma_bound}};
}

void write_json(const fs::path& path, const Json& doc) { write_file(path, doc.dump(2) + "\n"); }

Json run_summary(const IterateTrace& trace) {
  const double f = trace.records.empty() ? (trace.final_x - trace.final_y).squaredNorm()
                                         : trace.records.back().f;
  return Json{{"stop_reason", to_string(trace.stop_reason)},
              {"iterations", trace.iterations},
              {"final_f", f},
              {"gap", (trace.final_x - trace.final_y).norm()}};
}

// ---------------------------------------------------------------------------

int cmd_run_etf(const KeyValueConfig& cfg, const CommandOptions& opt, std::ostream& log,
                std::ostream& err) {
  cfg.require_known(with_run_keys({"n", "l", "seeds"}));
  FrameDesignConfig design;
  design.n = dimension(cfg, "n");
  design.l = dimension(cfg, "l");
  const std::vector<std::uint64_t> seeds = cfg.seeds("seeds");
  if (seeds.empty()) fail(ErrorCode::invalid_input, "key 'seeds' is empty");
  design.run = run_config(cfg, opt.debug_iterates);
  if (design.l < 2 || design.n > design.l) {
    fail(ErrorCode::invalid_input, "run-etf needs 1 <= n <= l and l >= 2");
  }
  const double xi = welch_bound(design.n, design.l);
  if (exceeds_gerzon_bound(design.n, design.l)) {
    err << "warning: l > n(n+1)/2, no real equiangular tight frame exists\n";
  }

  std::vector<SeedOutcome> outcomes = design_etf_seeds(design, seeds, opt.threads);

  Json results = Json::array();
  std::optional<std::size_t> best;
  std::size_t certified = 0;
  int status = kExitOk;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const SeedOutcome& o = outcomes[i];
    Json entry{{"seed", o.seed}};
    if (!o.result) {
      try {
        std::rethrow_exception(o.error);
      } catch (const Error& e) {
        entry["error"] = to_string(e.code());
        entry["message"] = e.what();
        if (e.iteration()) entry["iteration"] = *e.iteration();
        status = std::max(status, e.code() == ErrorCode::invalid_input ? kExitConfig
                                                                       : kExitNumerical);
        err << "seed " << o.seed << ": " << e.what() << "\n";
      }
      results.push_back(std::move(entry));
      continue;
    }
    const FrameDesignResult& r = *o.result;
    const std::string trace_name = "trace_seed" + std::to_string(o.seed) + ".csv";
    const std::string frame_name = "frame_seed" + std::to_string(o.seed) + ".csv";
    write_file(opt.out_dir / trace_name, format_trace_csv(r.trace.extra_names, r.trace.records));
    write_file(opt.out_dir / frame_name, matrix_csv(r.d));

    entry["trace"] = trace_name;
    entry["frame"] = frame_name;
    entry.update(run_summary(r.trace));
    entry["coherence"] = r.coherence;
    entry["tightness_residual"] = r.tightness_residual;
    if (r.certificate) {
      ++certified;
      entry["certificate"] = Json{{"k", r.certificate->k},
                                  {"nu", r.certificate->nu},
                                  {"gap_threshold", r.certificate->gap_threshold},
                                  {"min_gap_after", number_or_null(r.certificate->min_gap_after)},
                                  {"gap_holds", r.certificate->gap_holds}};
    } else {
      entry["certificate"] = nullptr;
    }
    entry["diagnostics"] = to_json(diagnose(r.trace.records));
    results.push_back(std::move(entry));
    if (!best || r.coherence < outcomes[*best].result->coherence) best = i;
  }

  Json diag{{"welch_bound", xi},
            {"best_seed", best ? Json(outcomes[*best].seed) : Json(nullptr)},
            {"best_coherence", best ? Json(outcomes[*best].result->coherence) : Json(nullptr)},
            {"best_excess_over_welch",
             best ? Json(outcomes[*best].result->coherence - xi) : Json(nullptr)},
            {"etf_known_to_exist", etf_known_to_exist(design.n, design.l)},
            {"gerzon_bound_exceeded", exceeds_gerzon_bound(design.n, design.l)},
            {"welch_attained",
             best && etf_known_to_exist(design.n, design.l)
                 ? Json(outcomes[*best].result->coherence <= xi + kWelchSlack)
                 : Json(nullptr)},
            {"certified_seeds", certified},
            {"failed_seeds", seeds.size() - std::count_if(outcomes.begin(), outcomes.end(),
                                                          [](const SeedOutcome& o) {
                                                            return o.result.has_value();
                                                          })}};
  write_json(opt.out_dir / "summary.json",
             Json{{"config_echo", config_echo(cfg)}, {"results", results}, {"diagnostics", diag}});
  log << "run-etf: " << seeds.size() << " seed(s), welch bound " << format_double(xi);
  if (best) log << ", best coherence " << format_double(outcomes[*best].result->coherence);
  log << "\n";
  return status;
}

int cmd_run_norms(const KeyValueConfig& cfg, const CommandOptions& opt, std::ostream& log) {
  cfg.require_known(with_run_keys({"n", "l", "c", "seed"}));
  FrameDesignConfig design;
  design.n = dimension(cfg, "n");
  design.l = dimension(cfg, "l");
  design.seed = cfg.count("seed");
  if (cfg.raw("c") == "ones") {
    design.c = ColumnNormTargets::ones(static_cast<std::size_t>(design.l));
  } else {
    std::vector<double> c = cfg.numbers("c");
    if (c.size() != static_cast<std::size_t>(design.l)) {
      fail(ErrorCode::invalid_input, "key 'c' must have l = " + std::to_string(design.l) +
                                         " entries, got " + std::to_string(c.size()));
    }
    design.c = ColumnNormTargets(std::move(c));
  }
  design.run = run_config(cfg, opt.debug_iterates);
  const ColumnNormTargets targets = design.targets();

  const FrameDesignResult r = design_prescribed_norm_frame(design);
  write_file(opt.out_dir / "trace.csv", format_trace_csv(r.trace.extra_names, r.trace.records));
  write_file(opt.out_dir / "frame.csv", matrix_csv(r.d));

  double col_residual = 0.0;
  for (Eigen::Index j = 0; j < r.d.cols(); ++j) {
    col_residual = std::max(col_residual, std::abs(r.d.col(j).squaredNorm() -
                                                   targets[static_cast<std::size_t>(j)]));
  }
  const auto col_idx = r.trace.extra_index(kMinColumnNormMetric);
  const auto sig_idx = r.trace.extra_index(kSigmaMinMetric);
  double min_col = std::numeric_limits<double>::infinity();
  double min_sig = std::numeric_limits<double>::infinity();
  for (const TraceRecord& rec : r.trace.records) {
    min_col = std::min(min_col, rec.extras[*col_idx]);
    min_sig = std::min(min_sig, rec.extras[*sig_idx]);
  }

  Json entry{{"seed", design.seed}, {"trace", "trace.csv"}, {"frame", "frame.csv"}};
  entry.update(run_summary(r.trace));
  entry["tightness"] = r.a;
  entry["tightness_residual"] = r.tightness_residual;
  entry["column_norm_residual"] = col_residual;
  entry["coherence"] = r.coherence;
  entry["prop1_guards"] = guard_json(evaluate_prop1_guards(min_col, min_sig, targets));
  const double bound = norms_contraction_bound(targets, design.n);
  Json contraction = inequality_json(check_contraction_bound(r.trace.records, bound));
  contraction["bound"] = bound;
  entry["contraction_bound"] = contraction;
  if (opt.debug_iterates) {
    Json tp = inequality_json(check_three_point_frames(r.trace, targets));
    tp["constant"] = three_point_frames_constant(targets);
    entry["three_point"] = tp;
    entry["prop1_guards_full"] = guard_json(check_prop1_guards(r.trace, targets));
  }

  write_json(opt.out_dir / "summary.json",
             Json{{"config_echo", config_echo(cfg)},
                  {"results", Json::array({entry})},
                  {"diagnostics", to_json(diagnose(r.trace.records))}});
  log << "run-norms: gap " << format_double(entry["gap"].get<double>()) << " after "
      << r.trace.iterations << " iterations\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

Matrix column(const std::vector<double>& v) {
  Matrix m(static_cast<Eigen::Index>(v.size()), 1);
  for (std::size_t i = 0; i < v.size(); ++i) m(static_cast<Eigen::Index>(i)) = v[i];
  return m;
}

std::vector<double> sized(const KeyValueConfig& cfg, const std::string& key, Eigen::Index dim,
                          bool broadcast) {
  std::vector<double> v = cfg.numbers(key);
  if (broadcast && v.size() == 1) v.assign(static_cast<std::size_t>(dim), v[0]);
  if (v.size() != static_cast<std::size_t>(dim)) {
    fail(ErrorCode::invalid_input,
         "key '" + key + "' must have " + std::to_string(dim) + " entries");
  }
  return v;
}

std::set<std::string> set_keys(const std::string& kind, const std::string& p) {
  if (kind == "box") return {p + "_lower", p + "_upper"};
  if (kind == "halfspace") return {p + "_normal", p + "_offset"};
  if (kind == "affine") return {p + "_basis", p + "_point"};
  if (kind == "line") return {p + "_angle_deg", p + "_offset"};
  fail(ErrorCode::invalid_input,
       "key '" + p + "_set' must be one of box, halfspace, affine, line (got '" + kind + "')");
}

Projector make_set(const KeyValueConfig& cfg, const std::string& p, Eigen::Index dim) {
  const std::string kind = cfg.word(p + "_set");
  if (kind == "box") {
    return box_set(column(sized(cfg, p + "_lower", dim, true)),
                   column(sized(cfg, p + "_upper", dim, true)));
  }
  if (kind == "halfspace") {
    return halfspace_set(column(sized(cfg, p + "_normal", dim, false)),
                         cfg.number(p + "_offset"));
  }
  if (kind == "affine") {
    const std::vector<double> b = cfg.numbers(p + "_basis");
    if (b.empty() || b.size() % static_cast<std::size_t>(dim) != 0) {
      fail(ErrorCode::invalid_input,
           "key '" + p + "_basis' must hold dim x m entries, column-major");
    }
    const auto m = static_cast<Eigen::Index>(b.size()) / dim;
    const Matrix basis = Eigen::Map<const Matrix>(b.data(), dim, m);
    return affine_set(basis, column(sized(cfg, p + "_point", dim, false)));
  }
  // line
  if (dim != 2) fail(ErrorCode::invalid_input, "line sets need dim = 2");
  const double angle = cfg.number(p + "_angle_deg") * std::numbers::pi / 180.0;
  const double offset = cfg.optional_number(p + "_offset").value_or(0.0);
  if (offset == 0.0) return line_set(angle);
  Matrix dir(2, 1);
  dir << std::cos(angle), std::sin(angle);
  Matrix point(2, 1);
  point << -offset * std::sin(angle), offset * std::cos(angle);
  return affine_set(dir, point);
}

int cmd_convex_demo(const KeyValueConfig& cfg, const CommandOptions& opt, std::ostream& log) {
  std::set<std::string> allowed = with_run_keys({"dim", "x_set", "y_set", "start", "seed"});
  for (const std::string p : {"x", "y"}) {
    const auto keys = set_keys(cfg.word(p + "_set"), p);
    allowed.insert(keys.begin(), keys.end());
  }
  cfg.require_known(allowed);
  const Eigen::Index dim = dimension(cfg, "dim");
  const Projector px = make_set(cfg, "x", dim);
  const Projector py = make_set(cfg, "y", dim);
  const RunConfig run = run_config(cfg, opt.debug_iterates);

  Matrix start;
  if (cfg.has("start") == cfg.has("seed")) {
    fail(ErrorCode::invalid_input, "exactly one of 'start' and 'seed' is required");
  }
  if (cfg.has("start")) {
    start = column(sized(cfg, "start", dim, false));
  } else {
    std::mt19937_64 rng(cfg.count("seed"));
    std::normal_distribution<double> normal(0.0, 1.0);
    start.resize(dim, 1);
    for (Eigen::Index i = 0; i < dim; ++i) start(i) = normal(rng);
  }
  const Matrix y0 = py.project(start);
  const IterateTrace trace = run_alternating_projections(px, py, y0, run);
  write_file(opt.out_dir / "trace.csv", format_trace_csv(trace.extra_names, trace.records));

  Json entry{{"trace", "trace.csv"}, {"y0", vector_json(y0)}};
  entry.update(run_summary(trace));
  entry["final_x"] = vector_json(trace.final_x);
  entry["final_y"] = vector_json(trace.final_y);
  const DiagnosticsReport rep = diagnose(trace.records);
  write_json(opt.out_dir / "report.json", Json{{"config_echo", config_echo(cfg)},
                                               {"results", Json::array({entry})},
                                               {"diagnostics", to_json(rep)}});
  log << "convex-demo: " << to_string(trace.stop_reason) << " after " << trace.iterations
      << " iterations, rate class " << (rep.kl ? to_string(rep.kl->rate_class) : rep.kl_status.c_str())
      << "\n";
  return kExitOk;
}

int cmd_analyze(const std::optional<KeyValueConfig>& cfg, const CommandOptions& opt,
                std::ostream& log) {
  fs::path trace_path;
  std::optional<double> epsilon;
  Json echo = Json::object();
  if (cfg) {
    cfg->require_known({"trace", "epsilon"});
    echo = config_echo(*cfg);
    epsilon = cfg->optional_number("epsilon");
    if (epsilon && !(*epsilon > 0.0)) fail(ErrorCode::invalid_input, "epsilon must be positive");
    if (!opt.trace) {
      trace_path = cfg->raw("trace");
      if (trace_path.is_relative() && opt.config) {
        trace_path = opt.config->parent_path() / trace_path;
      }
    }
  }
  if (opt.trace) {
    trace_path = *opt.trace;
    echo["trace"] = trace_path.string();
  }
  if (trace_path.empty()) fail(ErrorCode::invalid_input, "analyze needs --trace or a config with 'trace'");

  const TraceTable table = read_trace_csv(trace_path);
  DiagnosticsReport rep = diagnose(table.records);
  if (epsilon) {
    try {
      rep.certificate = certify_assumptions(table.records, epsilon);
      rep.certificate_status = "ok";
    } catch (const Error& e) {
      rep.certificate.reset();
      rep.certificate_status = to_string(e.code());
    }
  }
  Json entry{{"records", table.records.size()}, {"extra_columns", table.extra_names}};
  write_json(opt.out_dir / "report.json",
             Json{{"config_echo", echo}, {"results", Json::array({entry})},
                  {"diagnostics", to_json(rep)}});
  log << "analyze: " << table.records.size() << " records, KL "
      << (rep.kl ? to_string(rep.kl->rate_class) : rep.kl_status.c_str()) << "\n";
  return kExitOk;
}

}  // namespace

Json to_json(const DiagnosticsReport& r) {
  Json out{{"records", r.records},
           {"monotone", r.monotone},
           {"residual_identity", r.residual_identity},
           {"alpha_hat", number_or_null(r.alpha_hat)},
           {"alpha_status", r.alpha_status}};
  const auto& c = r.certificate;
  out["beta_hat"] = c ? number_or_null(c->beta_hat) : Json(nullptr);
  out["epsilon_used"] = c ? number_or_null(c->epsilon_used) : Json(nullptr);
  out["tail_start"] = c ? Json(c->tail_start) : Json(nullptr);
  out["assumptions_pass"] = c ? Json(c->pass) : Json(nullptr);
  out["certificate_status"] = r.certificate_status;
  const auto& kl = r.kl;
  out["theta_hat"] = kl ? Json(kl->theta_hat) : Json(nullptr);
  out["rate_class"] = kl ? Json(to_string(kl->rate_class)) : Json(nullptr);
  out["rho_hat"] = kl ? number_or_null(kl->rho_hat) : Json(nullptr);
  out["rho_f_hat"] =
      kl && kl->rho_hat ? number_or_null(*kl->rho_hat * *kl->rho_hat) : Json(nullptr);
  out["power_hat"] = kl ? number_or_null(kl->power_hat) : Json(nullptr);
  out["fit_r2"] = kl ? number_or_null(kl->fit_r2) : Json(nullptr);
  out["kl_samples"] = kl ? Json(kl->samples) : Json(nullptr);
  out["kl_status"] = r.kl_status;
  return out;
}

std::size_t threads_from_env() {
  const char* raw = std::getenv("ALTPROJ_THREADS");
  if (!raw || !*raw) return 0;
  const auto v = parse_count(raw);
  if (!v || *v == 0) fail(ErrorCode::invalid_input, "ALTPROJ_THREADS must be a positive integer");
  return static_cast<std::size_t>(*v);
}

int run_command(const std::string& command, const CommandOptions& options, std::ostream& log,
                std::ostream& err) {
  try {
    std::optional<KeyValueConfig> cfg;
    if (options.config) cfg = KeyValueConfig::load(*options.config);
    if (command != "analyze" && !cfg) fail(ErrorCode::invalid_input, command + " needs --config");
    std::error_code ec;
    fs::create_directories(options.out_dir, ec);
    if (ec) fail(ErrorCode::invalid_input, "cannot create '" + options.out_dir.string() + "'");

    if (command == "run-etf") return cmd_run_etf(*cfg, options, log, err);
    if (command == "run-norms") return cmd_run_norms(*cfg, options, log);
    if (command == "convex-demo") return cmd_convex_demo(*cfg, options, log);
    if (command == "analyze") return cmd_analyze(cfg, options, log);
    fail(ErrorCode::invalid_input, "unknown command '" + command + "'");
  } catch (const Error& e) {
    err << "altproj " << command << ": " << to_string(e.code()) << ": " << e.what() << "\n";
    return e.code() == ErrorCode::invalid_input ? kExitConfig : kExitNumerical;
  } catch (const std::exception& e) {
    err << "altproj " << command << ": " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace altproj::cli
