#pragma once

namespace dbmatch {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace dbmatch
