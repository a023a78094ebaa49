#pragma once

namespace dynmeans {
inline constexpr const char* kVersion = "0.1.0";
}
