#pragma once

namespace bbma {

inline constexpr const char* kVersion = "0.1.0";

} // namespace bbma
