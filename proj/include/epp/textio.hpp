#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace epp {

// Shortest-round-trip double formatting (std::to_chars) and strict parsing
// (std::from_chars). Every number we persist goes through this pair so that
// write -> read reproduces the exact bit pattern.
std::string format_double(double v);
bool try_parse_double(std::string_view s, double& out);  // false on any junk
double parse_double_or_throw(std::string_view s, const std::string& context);

std::string format_int(long long v);
bool try_parse_int(std::string_view s, long long& out);

// Whitespace-joined packing for large numeric blocks inside artifacts.
std::string pack_doubles(const std::vector<double>& v);
std::vector<double> unpack_doubles(std::string_view s, const std::string& context);
std::string pack_ints(const std::vector<int>& v);
std::vector<int> unpack_ints(std::string_view s, const std::string& context);

// Atomic-ish file write: temp file in the same directory, then rename.
void write_file_atomic(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

}  // namespace epp
