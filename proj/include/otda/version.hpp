#ifndef OTDA_VERSION_HPP
#define OTDA_VERSION_HPP

namespace otda {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace otda

#endif  // OTDA_VERSION_HPP
