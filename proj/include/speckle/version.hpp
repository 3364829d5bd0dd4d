#pragma once

namespace speckle {
inline constexpr const char* kVersion = "0.1.0";
}
