#pragma once

namespace rffp {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace rffp
