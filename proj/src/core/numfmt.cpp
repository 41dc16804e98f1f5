#include "hsilab/core/numfmt.hpp"

#include "hsilab/core/errors.hpp"

#include <charconv>
#include <cmath>

namespace hsilab {

std::string format_number(double x, int significant) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x < 0 ? "-inf" : "inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, significant);
    return std::string(buf, res.ptr);
}

std::string format_exact(double x) { return format_number(x, 17); }

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

double parse_number(std::string_view token) {
    token = trim(token);
    if (token == "inf") return INFINITY;
    if (token == "-inf") return -INFINITY;
    double value = 0.0;
    auto res = std::from_chars(token.data(), token.data() + token.size(), value);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size() || token.empty())
        throw ParameterError("not a number: '" + std::string(token) + "'");
    return value;
}

std::size_t parse_count(std::string_view token) {
    token = trim(token);
    std::size_t value = 0;
    auto res = std::from_chars(token.data(), token.data() + token.size(), value);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size() || token.empty())
        throw ParameterError("not a non-negative integer: '" + std::string(token) + "'");
    return value;
}

} // namespace hsilab
