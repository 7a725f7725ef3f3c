#pragma once

namespace rdpr {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace rdpr
