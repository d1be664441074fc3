#pragma once

namespace ff {

inline constexpr const char* kToolName = "fallacyforge";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace ff
