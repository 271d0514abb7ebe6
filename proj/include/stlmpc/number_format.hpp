#pragma once

#include <string>

namespace stlmpc {

// Shortest decimal text that parses back to the same double ("inf", "-inf", "nan" for specials).
std::string shortest_repr(double v);

// Scientific-free decimal with the given number of significant digits (%.{digits}g).
std::string significant_repr(double v, int digits);

}  // namespace stlmpc
