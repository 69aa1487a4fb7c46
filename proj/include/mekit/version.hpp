#pragma once

namespace mekit {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kFormatVersion = 1;  // track CSV / annotation / manifest / report schemas

}  // namespace mekit
