#pragma once

namespace modcurve {
inline constexpr const char* kVersion = "0.1.0";
}
