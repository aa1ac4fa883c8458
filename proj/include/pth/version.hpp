#pragma once

namespace pth {

inline constexpr const char* kToolName = "pthweb";
inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kReportSchemaVersion = "1.0";

} // namespace pth
