#pragma once

#include <string>
#include <string_view>

namespace infoconf {

/// Shortest representation that parses back to the same double. Locale
/// independent ('.' decimal separator, no grouping).
std::string format_double(double value);

/// Parses a complete decimal/scientific literal; throws InputError otherwise.
double parse_double(std::string_view text);

}  // namespace infoconf
