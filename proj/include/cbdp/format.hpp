#pragma once

#include <string>

namespace cbdp {

// `significant` significant digits (%g style); integral values keep a
// trailing ".0" so the column type stays unambiguous.
std::string format_number(double value, int significant = 12);

// `decimals` digits after the point, trailing zeros removed ("1.50" -> "1.5", "2.000" -> "2").
std::string format_fixed_trimmed(double value, int decimals);

}  // namespace cbdp
