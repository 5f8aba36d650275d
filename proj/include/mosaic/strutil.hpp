// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace mosaic {

/// printf-style formatting into a std::string.
std::string strfmt(const char* fmt, ...);

/// Shortest round-trip-exact decimal form of a double ("%.17g").
std::string fmt_double(double v);

std::string trim(const std::string& s);
std::vector<std::string> split(const std::string& s, char delim);

} // namespace mosaic
