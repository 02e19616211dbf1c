#pragma once

#include <fmt/format.h>

#include <string>
#include <string_view>

namespace appwatch::csv {

/// RFC 4180 quoting when the value contains a separator, quote or newline.
inline std::string field(std::string_view s)
{
    if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

/// Shortest representation that round-trips.
inline std::string number(double v)
{
    return fmt::format("{}", v);
}

}  // namespace appwatch::csv
