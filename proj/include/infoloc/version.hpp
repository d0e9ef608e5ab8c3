#pragma once

namespace infoloc {
inline constexpr const char* kVersion = "1.0.0";
}
