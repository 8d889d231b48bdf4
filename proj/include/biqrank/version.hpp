#pragma once

namespace biqrank {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kToolName = "biqrank";

}  // namespace biqrank
