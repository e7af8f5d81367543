#pragma once

namespace ahhs {

inline constexpr const char* kToolVersion = "0.1.0";

} // namespace ahhs
