#pragma once

namespace deltalab {

inline constexpr const char* kToolName = "deltalab";
inline constexpr const char* kVersion = "1.0.0";

}  // namespace deltalab
