#pragma once

namespace kglab {

// Embedded in every report so outputs can be traced to the code that made them.
inline constexpr const char* version_string = "kglab 0.1.0";

}  // namespace kglab
