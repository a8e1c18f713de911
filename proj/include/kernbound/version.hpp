#pragma once

namespace kernbound {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace kernbound
