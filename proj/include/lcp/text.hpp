#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace lcp {

// Locale-independent number/text helpers shared by the file formats.

std::vector<std::string> split(const std::string& line, char delim);

// Throw parse_error with `context` in the message on failure.
double parse_double(const std::string& cell, const std::string& context);
long long parse_int(const std::string& cell, const std::string& context);

// 17 significant digits; reparsing yields the identical double.
std::string format_exact(double v);

// Fixed-point with `places` decimals.
std::string format_fixed(double v, int places = 6);

// Value of format_fixed(v) reparsed, i.e. v rounded to `places` decimals.
double quantize_fixed(double v, int places = 6);

std::uint64_t fnv1a64(std::string_view s);

std::string trim(const std::string& s);

}  // namespace lcp
