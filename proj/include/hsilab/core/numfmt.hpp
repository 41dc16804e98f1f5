#pragma once

#include <string>
#include <string_view>

namespace hsilab {

/// Locale-independent shortest general formatting with `significant` digits.
std::string format_number(double x, int significant);

/// Locale-independent round-trip formatting (17 significant digits).
std::string format_exact(double x);

/// Locale-independent parse of a full token; throws ParameterError on junk.
double parse_number(std::string_view token);
std::size_t parse_count(std::string_view token);

std::string_view trim(std::string_view s);

} // namespace hsilab
