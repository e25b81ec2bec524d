#pragma once

namespace divband {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace divband
