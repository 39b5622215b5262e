#pragma once

namespace krip {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace krip
