#pragma once

namespace striplab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace striplab
