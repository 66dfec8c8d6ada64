#pragma once

#include <cstdio>
#include <string>

namespace partwise::detail {

/// printf-style formatting into a std::string.
template <typename... Args>
std::string strformat(const char* fmt, Args... args) {
    const int n = std::snprintf(nullptr, 0, fmt, args...);
    std::string s(static_cast<std::size_t>(n), '\0');
    std::snprintf(s.data(), s.size() + 1, fmt, args...);
    return s;
}

}  // namespace partwise::detail
