#pragma once

namespace nac {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace nac
