#pragma once

namespace eulab {
inline constexpr const char* kVersion = "eulab 0.1.0";
}
