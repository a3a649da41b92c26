#pragma once

namespace womble {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace womble
