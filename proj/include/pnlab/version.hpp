#pragma once

namespace pnlab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace pnlab
