#ifndef DOTMAT_NUMERIC_IO_HPP
#define DOTMAT_NUMERIC_IO_HPP

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <system_error>

namespace dotmat::detail {

// Shortest decimal that round-trips the exact double.
inline std::string format_double(double value) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

inline bool parse_double(std::string_view text, double& out) {
    if (text.empty()) return false;
    auto res = std::from_chars(text.data(), text.data() + text.size(), out);
    return res.ec == std::errc{} && res.ptr == text.data() + text.size();
}

inline bool parse_int64(std::string_view text, std::int64_t& out) {
    if (text.empty()) return false;
    auto res = std::from_chars(text.data(), text.data() + text.size(), out);
    return res.ec == std::errc{} && res.ptr == text.data() + text.size();
}

inline bool parse_uint64(std::string_view text, std::uint64_t& out) {
    if (text.empty()) return false;
    auto res = std::from_chars(text.data(), text.data() + text.size(), out);
    return res.ec == std::errc{} && res.ptr == text.data() + text.size();
}

inline bool parse_size(std::string_view text, std::size_t& out) {
    std::uint64_t v = 0;
    if (!parse_uint64(text, v)) return false;
    out = static_cast<std::size_t>(v);
    return true;
}

}  // namespace dotmat::detail

#endif  // DOTMAT_NUMERIC_IO_HPP
