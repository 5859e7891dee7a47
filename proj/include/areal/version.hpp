#pragma once

namespace areal {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kConfigFormatVersion = 1;
inline constexpr int kModelDumpFormatVersion = 1;

}  // namespace areal
