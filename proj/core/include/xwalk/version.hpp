#pragma once

namespace xwalk {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace xwalk
