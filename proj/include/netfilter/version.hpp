#pragma once

namespace nf {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace nf
