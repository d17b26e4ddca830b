#pragma once

namespace pens {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace pens
