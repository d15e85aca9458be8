#pragma once

#include <string>

#include "cardiobif/integrate.hpp"

namespace cardiobif {

// CSV: header "t,<component names in canonical order>", one row per sample.
void write_trace_csv(const Trace& trace, const std::string& path);
Trace read_trace_csv(const std::string& path); // throws DomainError

// Binary: two little-endian uint64 (column count including the leading time
// column, record count), then record-major little-endian float64 data.
void write_trace_binary(const Trace& trace, const std::string& path);
Trace read_trace_binary(const std::string& path); // throws DomainError

} // namespace cardiobif
