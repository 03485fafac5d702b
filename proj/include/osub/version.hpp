#pragma once

namespace osub {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace osub
