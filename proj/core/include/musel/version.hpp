#pragma once

namespace musel {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace musel
