#pragma once

namespace pic {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace pic
