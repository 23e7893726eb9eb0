#pragma once

namespace cbdp {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace cbdp
