#pragma once

namespace magbot {
inline constexpr const char* kVersion = "0.1.0";
}
