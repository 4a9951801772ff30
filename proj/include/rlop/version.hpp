#pragma once

namespace rlop {

inline constexpr const char* kVersion = "0.1.0";

} // namespace rlop
