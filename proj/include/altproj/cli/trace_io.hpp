#pragma once

// Trace CSV: header `iter,f,dx,dy,residual,<extra names>`, LF line endings,
// shortest round-trip decimals, empty field for an undefined value.

#include "altproj/engine.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace altproj::cli {

struct TraceTable {
  std::vector<std::string> extra_names;
  std::vector<TraceRecord> records;
};

std::string format_trace_csv(const std::vector<std::string>& extra_names,
                             const std::vector<TraceRecord>& records);

/// Throws invalid-input with "<source>:<line>: ..." on malformed input.
TraceTable parse_trace_csv(const std::string& text, const std::string& source = "trace");
TraceTable read_trace_csv(const std::filesystem::path& path);

/// Writes bytes verbatim (binary mode). Throws invalid-input on I/O failure.
void write_file(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace altproj::cli
