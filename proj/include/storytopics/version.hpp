#pragma once

namespace storytopics {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace storytopics
