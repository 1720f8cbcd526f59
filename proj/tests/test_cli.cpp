#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "altproj/cli/commands.hpp"
#include "altproj/cli/config.hpp"
#include "altproj/cli/trace_io.hpp"
#include "altproj/error.hpp"
#include "oracles.hpp"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <sstream>

using namespace altproj;
using namespace altproj::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& tag) {
  std::string tmpl = (fs::temp_directory_path() / ("altproj_" + tag + "_XXXXXX")).string();
  REQUIRE(mkdtemp(tmpl.data()) != nullptr);
  return tmpl;
}

struct Outcome {
  int code = 0;
  std::string log;
  std::string err;
};

Outcome run(const std::string& command, const fs::path& config, const fs::path& out,
            bool debug = false) {
  CommandOptions opt;
  opt.config = config;
  opt.out_dir = out;
  opt.debug_iterates = debug;
  opt.threads = 2;
  std::ostringstream log, err;
  Outcome o;
  o.code = run_command(command, opt, log, err);
  o.log = log.str();
  o.err = err.str();
  return o;
}

Outcome analyze(const fs::path& trace, const fs::path& out) {
  CommandOptions opt;
  opt.trace = trace;
  opt.out_dir = out;
  std::ostringstream log, err;
  Outcome o;
  o.code = run_command("analyze", opt, log, err);
  o.err = err.str();
  return o;
}

fs::path write_config(const fs::path& dir, const std::string& name, const std::string& text) {
  const fs::path p = dir / name;
  write_file(p, text);
  return p;
}

Json load_json(const fs::path& p) { return Json::parse(read_file(p)); }

int shell(const std::string& cmd) {
  const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config parser") {
  const KeyValueConfig c = KeyValueConfig::parse(
      "# comment\n"
      "n = 3\n"
      "  l=6   # trailing\n"
      "c = 1, 2.5 ,3\n"
      "seeds = 2..5\n"
      "list = 7,8\n"
      "name = ones\n");
  CHECK(c.count("n") == 3);
  CHECK(c.integer("l") == 6);
  CHECK(c.numbers("c") == std::vector<double>{1.0, 2.5, 3.0});
  CHECK(c.seeds("seeds") == std::vector<std::uint64_t>{2, 3, 4, 5});
  CHECK(c.seeds("list") == std::vector<std::uint64_t>{7, 8});
  CHECK(c.word("name") == "ones");
  CHECK(c.number("n") == 3.0);
  CHECK_FALSE(c.optional_number("tol").has_value());
  CHECK(c.entries().front().first == "n");

  const auto err = [](auto fn) -> std::string {
    try {
      fn();
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::invalid_input);
      return e.what();
    }
    FAIL("expected an error");
    return {};
  };
  CHECK(err([&] { c.raw("tol"); }).find("'tol'") != std::string::npos);
  CHECK(err([] { KeyValueConfig::parse("n = 3\nbroken line\n", "cfg"); }).find("cfg:2") !=
        std::string::npos);
  CHECK(err([] { KeyValueConfig::parse("n = 3\nn = 4\n"); }).find("duplicate") !=
        std::string::npos);
  CHECK(err([] { KeyValueConfig::parse("n =\n"); }).find("empty") != std::string::npos);
  CHECK(err([&] { c.count("c"); }).find("'c'") != std::string::npos);
  CHECK(err([&] { c.require_known({"n", "l"}); }).find("unknown key") != std::string::npos);
  const KeyValueConfig bad = KeyValueConfig::parse("x = 1e\ns = 5..2\nneg = -1\n");
  err([&] { bad.number("x"); });
  err([&] { bad.seeds("s"); });
  err([&] { bad.count("neg"); });
}

TEST_CASE("trace CSV round trip is exact") {
  oracle::Rng rng(1);
  std::vector<TraceRecord> recs;
  for (std::size_t k = 1; k <= 20; ++k) {
    TraceRecord r;
    r.k = k;
    r.f = oracle::uniform(rng, 0.0, 1.0) * std::pow(10.0, -static_cast<double>(k));
    r.dx = k == 1 ? std::nan("") : oracle::uniform(rng, 0.0, 1.0);
    r.dy = oracle::uniform(rng, 0.0, 1.0) / 3.0;
    r.residual = 2.0 * r.dy;
    r.extras = {oracle::uniform(rng, -1.0, 1.0), 0.1};
    recs.push_back(r);
  }
  const std::string text = format_trace_csv({"a", "b"}, recs);
  CHECK(text.rfind("iter,f,dx,dy,residual,a,b\n", 0) == 0);
  CHECK(text.find('\r') == std::string::npos);
  CHECK(text.find("\n1,") != std::string::npos);
  CHECK(text.find(",,") != std::string::npos);  // undefined dx at k = 1

  const TraceTable back = parse_trace_csv(text);
  CHECK(back.extra_names == std::vector<std::string>{"a", "b"});
  REQUIRE(back.records.size() == recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    CHECK(back.records[i].k == recs[i].k);
    CHECK(back.records[i].f == recs[i].f);
    CHECK(back.records[i].dy == recs[i].dy);
    CHECK(back.records[i].residual == recs[i].residual);
    CHECK(back.records[i].extras == recs[i].extras);
    if (i == 0) {
      CHECK(std::isnan(back.records[i].dx));
    } else {
      CHECK(back.records[i].dx == recs[i].dx);
    }
  }
  CHECK(format_trace_csv({"a", "b"}, back.records) == text);
}

TEST_CASE("malformed trace CSV reports the line") {
  const auto line_of = [](const std::string& text) -> std::string {
    try {
      parse_trace_csv(text, "t.csv");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::invalid_input);
      return e.what();
    }
    FAIL("expected an error");
    return {};
  };
  CHECK(line_of("").find("t.csv:1") != std::string::npos);
  CHECK(line_of("iter,f,dy,dx,residual\n").find("t.csv:1") != std::string::npos);
  CHECK(line_of("iter,f,dx,dy,residual\n1,1,,1,2\n2,0.5,x,0.5,1\n").find("t.csv:3") !=
        std::string::npos);
  CHECK(line_of("iter,f,dx,dy,residual\n1,1,,1\n").find("t.csv:2") != std::string::npos);
  CHECK(line_of("iter,f,dx,dy,residual\n2,1,,1,2\n1,1,1,1,2\n").find("t.csv:3") !=
        std::string::npos);
  CHECK(line_of("iter,f,dx,dy,residual\n1,,,1,2\n").find("t.csv:2") != std::string::npos);
  CHECK(parse_trace_csv("iter,f,dx,dy,residual\n").records.empty());
}

TEST_CASE("run-etf writes one trace per seed and a summary") {
  const fs::path dir = scratch_dir("etf");
  const fs::path cfg = write_config(dir, "etf.cfg",
                                    "n = 3\nl = 6\nseeds = 1..4\nmax_iter = 5000\ntol = 1e-10\n");
  const Outcome o = run("run-etf", cfg, dir / "out");
  REQUIRE(o.code == kExitOk);
  for (int s = 1; s <= 4; ++s) {
    CHECK(fs::exists(dir / "out" / ("trace_seed" + std::to_string(s) + ".csv")));
    CHECK(fs::exists(dir / "out" / ("frame_seed" + std::to_string(s) + ".csv")));
  }
  const Json j = load_json(dir / "out" / "summary.json");
  CHECK(j.contains("config_echo"));
  CHECK(j["config_echo"]["n"] == 3);
  REQUIRE(j["results"].size() == 4);
  const double xi = j["diagnostics"]["welch_bound"];
  CHECK(xi == doctest::Approx(std::sqrt(0.2)));
  double best = 1.0;
  for (const auto& r : j["results"]) {
    CHECK(r["certificate"].is_object());
    CHECK(r["certificate"]["k"].get<int>() >= 1);
    best = std::min(best, r["coherence"].get<double>());
  }
  CHECK(j["diagnostics"]["best_coherence"].get<double>() == best);
  CHECK(best <= xi + 5e-3);
  CHECK(j["diagnostics"]["welch_attained"] == true);
  CHECK(j["diagnostics"]["certified_seeds"] == 4);

  for (int s = 1; s <= 4; ++s) {
    const fs::path t = dir / "out" / ("trace_seed" + std::to_string(s) + ".csv");
    CHECK(analyze(t, dir / ("an" + std::to_string(s))).code == kExitOk);
  }
  fs::remove_all(dir);
}

TEST_CASE("run-etf with n = l reports zero coherence") {
  const fs::path dir = scratch_dir("etf2");
  const fs::path cfg =
      write_config(dir, "c.cfg", "n = 2\nl = 2\nseeds = 1\nmax_iter = 100\ntol = 1e-10\n");
  REQUIRE(run("run-etf", cfg, dir).code == kExitOk);
  const Json j = load_json(dir / "summary.json");
  CHECK(j["diagnostics"]["best_coherence"].get<double>() <= 1e-12);
  fs::remove_all(dir);
}

TEST_CASE("config errors exit with code 2 and name the problem") {
  const fs::path dir = scratch_dir("bad");
  const Outcome missing =
      run("run-etf", write_config(dir, "a.cfg", "n = 3\nseeds = 1\nmax_iter = 10\ntol = 1\n"), dir);
  CHECK(missing.code == kExitConfig);
  CHECK(missing.err.find("'l'") != std::string::npos);

  const Outcome length = run(
      "run-norms",
      write_config(dir, "b.cfg", "n = 3\nl = 5\nc = 1,1,1\nseed = 1\nmax_iter = 10\ntol = 1e-9\n"),
      dir);
  CHECK(length.code == kExitConfig);
  CHECK(length.err.find("'c'") != std::string::npos);

  const Outcome nonpos = run(
      "run-norms",
      write_config(dir, "c.cfg",
                   "n = 2\nl = 3\nc = 1,0,1\nseed = 1\nmax_iter = 10\ntol = 1e-9\n"),
      dir);
  CHECK(nonpos.code == kExitConfig);

  const Outcome unknown = run(
      "run-etf",
      write_config(dir, "d.cfg", "n = 3\nl = 6\nseeds = 1\nmax_iter = 10\ntol = 1\nfoo = 2\n"),
      dir);
  CHECK(unknown.code == kExitConfig);
  CHECK(unknown.err.find("'foo'") != std::string::npos);

  const Outcome badset = run(
      "convex-demo",
      write_config(dir, "e.cfg", "dim = 2\nx_set = disk\ny_set = box\nmax_iter = 1\ntol = 1\n"),
      dir);
  CHECK(badset.code == kExitConfig);

  CHECK(run("run-etf", dir / "does_not_exist.cfg", dir).code == kExitConfig);
  CHECK(run("nonsense", write_config(dir, "f.cfg", "n = 1\n"), dir).code == kExitConfig);

  write_file(dir / "bad.csv", "iter,f,dx,dy,residual\n1,1,,1,2\n2,oops,1,1,2\n");
  const Outcome csv = analyze(dir / "bad.csv", dir);
  CHECK(csv.code == kExitConfig);
  CHECK(csv.err.find(":3:") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("run-norms summary") {
  const fs::path dir = scratch_dir("norms");
  const fs::path cfg = write_config(
      dir, "n.cfg", "n = 3\nl = 5\nc = ones\nseed = 1\nmax_iter = 10000\ntol = 1e-10\n");
  REQUIRE(run("run-norms", cfg, dir, true).code == kExitOk);
  const Json j = load_json(dir / "summary.json");
  const Json& r = j["results"][0];
  CHECK(r["gap"].get<double>() <= 1e-6);
  CHECK(r["tightness_residual"].get<double>() <= 1e-6);
  CHECK(r["column_norm_residual"].get<double>() <= 1e-6);
  CHECK(r["prop1_guards"]["status"] == "holds");
  CHECK(r["prop1_guards_full"]["status"] == "holds");
  CHECK(r["three_point"]["holds"] == true);
  CHECK(r["contraction_bound"]["holds"] == true);
  CHECK(j["diagnostics"]["monotone"] == true);
  const TraceTable t = read_trace_csv(dir / "trace.csv");
  CHECK(t.extra_names == std::vector<std::string>{"min_col_norm_x", "sigma_min_y"});
  CHECK(analyze(dir / "trace.csv", dir / "an").code == kExitOk);
  fs::remove_all(dir);
}

TEST_CASE("convex-demo examples") {
  const fs::path dir = scratch_dir("convex");
  const std::string run_keys = "max_iter = 2000\n";

  REQUIRE(run("convex-demo",
              write_config(dir, "lines.cfg",
                           "dim = 2\nx_set = line\nx_angle_deg = 0\ny_set = line\n"
                           "y_angle_deg = 45\nstart = 1, 1\ntol = 1e-30\n" + run_keys),
              dir / "lines")
              .code == kExitOk);
  const Json lines = load_json(dir / "lines" / "report.json");
  CHECK(lines["diagnostics"]["rate_class"] == "linear");
  CHECK(lines["diagnostics"]["theta_hat"] == 0.5);
  CHECK(lines["diagnostics"]["rho_f_hat"].get<double>() == doctest::Approx(0.25).epsilon(0.05));
  CHECK(lines["diagnostics"]["rho_hat"].get<double>() == doctest::Approx(0.5).epsilon(0.05));
  CHECK(lines["diagnostics"]["alpha_hat"].is_number());
  CHECK(lines["diagnostics"]["beta_hat"].is_number());

  REQUIRE(run("convex-demo",
              write_config(dir, "boxes.cfg",
                           "dim = 3\nx_set = box\nx_lower = -1\nx_upper = 1\ny_set = box\n"
                           "y_lower = -1\ny_upper = 1\nseed = 3\ntol = 1e-10\n" + run_keys),
              dir / "boxes")
              .code == kExitOk);
  CHECK(load_json(dir / "boxes" / "report.json")["diagnostics"]["rate_class"] == "finite");

  REQUIRE(run("convex-demo",
              write_config(dir, "par.cfg",
                           "dim = 2\nx_set = line\nx_angle_deg = 0\ny_set = line\n"
                           "y_angle_deg = 0\ny_offset = 1\nstart = 5, 1\ntol = 1e-10\n"
                           "stagnation_tol = 1e-14\n" + run_keys),
              dir / "par")
              .code == kExitOk);
  const Json par = load_json(dir / "par" / "report.json");
  CHECK(par["results"][0]["stop_reason"] == "stagnation");
  CHECK(par["results"][0]["gap"].get<double>() == doctest::Approx(1.0));

  REQUIRE(run("convex-demo",
              write_config(dir, "mix.cfg",
                           "dim = 3\nx_set = halfspace\nx_normal = 1, 1, 0\nx_offset = 0.5\n"
                           "y_set = affine\ny_basis = 1,0,0, 0,0,1\ny_point = 0, 2, 0\n"
                           "seed = 4\ntol = 1e-10\n" + run_keys),
              dir / "mix")
              .code == kExitOk);
  CHECK(load_json(dir / "mix" / "report.json")["results"][0]["stop_reason"] == "tolerance");

  for (const char* sub : {"lines", "boxes", "par", "mix"}) {
    CHECK(analyze(dir / sub / "trace.csv", dir / sub / "an").code == kExitOk);
  }
  fs::remove_all(dir);
}

TEST_CASE("analyze on synthetic traces") {
  const fs::path dir = scratch_dir("an");
  write_file(dir / "geo.csv", format_trace_csv({}, oracle::trace_from_errors(
                                                       100, [](double k) { return std::pow(0.9, k); })));
  REQUIRE(analyze(dir / "geo.csv", dir / "geo").code == kExitOk);
  const Json g = load_json(dir / "geo" / "report.json")["diagnostics"];
  CHECK(g["rate_class"] == "linear");
  CHECK(std::abs(g["rho_hat"].get<double>() - 0.9) <= 1e-6);

  write_file(dir / "short.csv", format_trace_csv({}, oracle::trace_from_errors(
                                                         5, [](double k) { return std::pow(0.9, k); })));
  REQUIRE(analyze(dir / "short.csv", dir / "short").code == kExitOk);
  const Json s = load_json(dir / "short" / "report.json")["diagnostics"];
  CHECK(s["kl_status"] == "insufficient-data");
  CHECK(s["theta_hat"].is_null());
  CHECK(s["rate_class"].is_null());

  for (double p : {1.0, 2.0, 3.0}) {
    write_file(dir / "pw.csv", format_trace_csv({}, oracle::trace_from_errors(
                                                        400, [p](double k) { return std::pow(k, -p); })));
    REQUIRE(analyze(dir / "pw.csv", dir / "pw").code == kExitOk);
    const Json d = load_json(dir / "pw" / "report.json")["diagnostics"];
    CHECK(d["rate_class"] == "sublinear");
    CHECK(std::abs(d["theta_hat"].get<double>() - (1.0 + p) / (1.0 + 2.0 * p)) <= 0.02);
  }

  // Config form with a relative trace path and an explicit epsilon.
  const fs::path cfg = write_config(dir, "an.cfg", "trace = geo.csv\nepsilon = 0.05\n");
  REQUIRE(run("analyze", cfg, dir / "viacfg").code == kExitOk);
  const Json v = load_json(dir / "viacfg" / "report.json");
  CHECK(v["diagnostics"]["epsilon_used"] == 0.05);
  CHECK(v["config_echo"]["trace"] == "geo.csv");
  fs::remove_all(dir);
}

TEST_CASE("outputs are byte-identical across runs and thread counts") {
  const fs::path dir = scratch_dir("det");
  const fs::path cfg =
      write_config(dir, "e.cfg", "n = 3\nl = 6\nseeds = 1..3\nmax_iter = 300\ntol = 1e-10\n");
  REQUIRE(run("run-etf", cfg, dir / "a").code == kExitOk);
  CommandOptions opt;
  opt.config = cfg;
  opt.out_dir = dir / "b";
  opt.threads = 1;
  std::ostringstream log, err;
  REQUIRE(run_command("run-etf", opt, log, err) == kExitOk);
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    const fs::path other = dir / "b" / entry.path().filename();
    CHECK(read_file(entry.path()) == read_file(other));
  }
  fs::remove_all(dir);
}

TEST_CASE("the binary maps outcomes to exit codes") {
  const std::string bin = ALTPROJ_BIN;
  const fs::path dir = scratch_dir("bin");
  const std::string configs = ALTPROJ_CONFIGS;
  CHECK(shell(bin + " run-norms --config " + configs + "/norms_3x5.cfg --out " +
              (dir / "n").string()) == 0);
  CHECK(shell(bin + " analyze --trace " + (dir / "n" / "trace.csv").string() + " --out " +
              (dir / "a").string()) == 0);
  write_file(dir / "m.cfg", "n = 3\nseeds = 1\nmax_iter = 10\ntol = 1e-9\n");
  CHECK(shell(bin + " run-etf --config " + (dir / "m.cfg").string() + " --out " +
              dir.string()) == 2);
  CHECK(shell(bin + " bogus") == 2);
  CHECK(shell(bin + " run-etf --no-such-flag") == 2);
  CHECK(shell(bin + " --help") == 0);
  CHECK(shell("ALTPROJ_THREADS=zero " + bin + " run-norms --config " + configs +
              "/norms_3x5.cfg --out " + dir.string()) == 2);
  CHECK(shell("ALTPROJ_THREADS=1 " + bin + " run-etf --config " + configs +
              "/etf_3x6.cfg --out " + (dir / "e").string()) == 0);
  fs::remove_all(dir);
}

TEST_CASE("numerical failures exit with code 3") {
  // The halfspace step overflows: the excess over the offset is +inf.
  const fs::path dir = scratch_dir("nf");
  CommandOptions opt;
  opt.config = write_config(dir, "overflow.cfg",
                            "dim = 2\nx_set = halfspace\nx_normal = 1, 1\nx_offset = -1e308\n"
                            "y_set = box\ny_lower = -1.7e308\ny_upper = 1.7e308\n"
                            "start = 1.7e308, 1.7e308\nmax_iter = 100\ntol = 1e-10\n");
  opt.out_dir = dir / "out";
  std::ostringstream log, err;
  CHECK(run_command("convex-demo", opt, log, err) == kExitNumerical);
  CHECK(err.str().find("numerical-failure") != std::string::npos);
  CHECK(shell(std::string(ALTPROJ_BIN) + " convex-demo --config " + opt.config->string() +
              " --out " + (dir / "bin").string()) == 3);
  fs::remove_all(dir);
}
