#pragma once

namespace retrainbench {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace retrainbench
