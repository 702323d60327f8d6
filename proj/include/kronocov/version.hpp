#pragma once

namespace kronocov {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace kronocov
