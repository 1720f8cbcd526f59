#include "altproj/cli/trace_io.hpp"

#include "altproj/cli/config.hpp"
#include "altproj/error.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace altproj::cli {

namespace {

constexpr const char* kFixedHeader[] = {"iter", "f", "dx", "dy", "residual"};

void append_field(std::string& out, double v) {
  if (!std::isnan(v)) out += format_double(v);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::string format_trace_csv(const std::vector<std::string>& extra_names,
                             const std::vector<TraceRecord>& records) {
  std::string out = "iter,f,dx,dy,residual";
  for (const auto& name : extra_names) out += "," + name;
  out += '\n';
  for (const TraceRecord& r : records) {
    out += std::to_string(r.k);
    for (double v : {r.f, r.dx, r.dy, r.residual}) {
      out += ',';
      append_field(out, v);
    }
    for (double v : r.extras) {
      out += ',';
      append_field(out, v);
    }
    out += '\n';
  }
  return out;
}

TraceTable parse_trace_csv(const std::string& text, const std::string& source) {
  TraceTable table;
  std::stringstream ss(text);
  std::string line;
  std::size_t lineno = 0;
  std::size_t width = 0;
  const auto bad = [&](const std::string& msg) {
    fail(ErrorCode::invalid_input, source + ":" + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(ss, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1) {
      const auto fields = split_fields(line);
      if (fields.size() < 5) bad("header must start with iter,f,dx,dy,residual");
      for (std::size_t i = 0; i < 5; ++i) {
        if (fields[i] != kFixedHeader[i]) bad("header must start with iter,f,dx,dy,residual");
      }
      for (std::size_t i = 5; i < fields.size(); ++i) {
        if (fields[i].empty()) bad("empty extra column name");
        table.extra_names.push_back(fields[i]);
      }
      width = fields.size();
      continue;
    }
    if (line.empty()) {
      if (ss.peek() == std::char_traits<char>::eof()) break;
      bad("empty line");
    }
    const auto fields = split_fields(line);
    if (fields.size() != width) {
      bad("expected " + std::to_string(width) + " fields, got " + std::to_string(fields.size()));
    }
    TraceRecord r;
    const auto k = parse_count(fields[0]);
    if (!k || *k == 0) bad("iter must be a positive integer");
    if (!table.records.empty() && *k <= table.records.back().k) bad("iter must increase");
    r.k = static_cast<std::size_t>(*k);
    const auto value = [&](std::size_t i, bool optional) {
      if (fields[i].empty()) {
        if (!optional) bad(std::string("missing value for ") + kFixedHeader[i]);
        return std::numeric_limits<double>::quiet_NaN();
      }
      const auto v = parse_double(fields[i]);
      if (!v) bad("column " + std::to_string(i + 1) + " is not a number: '" + fields[i] + "'");
      return *v;
    };
    r.f = value(1, false);
    r.dx = value(2, true);
    r.dy = value(3, false);
    r.residual = value(4, false);
    for (std::size_t i = 5; i < width; ++i) {
      if (fields[i].empty()) {
        r.extras.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      const auto v = parse_double(fields[i]);
      if (!v) bad("column " + std::to_string(i + 1) + " is not a number: '" + fields[i] + "'");
      r.extras.push_back(*v);
    }
    table.records.push_back(std::move(r));
  }
  if (lineno == 0) fail(ErrorCode::invalid_input, source + ":1: empty file, header missing");
  return table;
}

TraceTable read_trace_csv(const std::filesystem::path& path) {
  return parse_trace_csv(read_file(path), path.string());
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::invalid_input, "cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::invalid_input, "write to '" + path.string() + "' failed");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::invalid_input, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace altproj::cli
